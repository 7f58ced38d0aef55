#include "btc/io.hpp"

#include <json.hpp>

#include <cctype>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace btc {
namespace io {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap cfg;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(lineno) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw Error(ErrorCode::ParseError,
                            "line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        cfg[key] = val;
    }
    return cfg;
}

ConfigMap parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::uint64_t config_digest(const ConfigMap& cfg) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : cfg) {
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    return h;
}

std::string digest_hex(std::uint64_t d) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

const std::string& require(const ConfigMap& cfg, const std::string& key) {
    auto it = cfg.find(key);
    if (it == cfg.end()) throw Error(ErrorCode::MissingKey, "missing config key: " + key);
    return it->second;
}

std::string get_str(const ConfigMap& cfg, const std::string& key, const std::string& dflt) {
    auto it = cfg.find(key);
    return it == cfg.end() ? dflt : it->second;
}

namespace {

double parse_num(const std::string& key, const std::string& val) {
    const char* s = val.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw Error(ErrorCode::ParseError, "key " + key + ": not a number: '" + val + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& val) {
    const char* s = val.c_str();
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < INT_MIN || v > INT_MAX)
        throw Error(ErrorCode::ParseError, "key " + key + ": not an integer: '" + val + "'");
    return static_cast<int>(v);
}

}  // namespace

double get_num(const ConfigMap& cfg, const std::string& key, double dflt) {
    auto it = cfg.find(key);
    return it == cfg.end() ? dflt : parse_num(key, it->second);
}

double require_num(const ConfigMap& cfg, const std::string& key) {
    return parse_num(key, require(cfg, key));
}

int get_int(const ConfigMap& cfg, const std::string& key, int dflt) {
    auto it = cfg.find(key);
    return it == cfg.end() ? dflt : parse_int(key, it->second);
}

std::vector<int> get_int_list(const ConfigMap& cfg, const std::string& key,
                              const std::vector<int>& dflt) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return dflt;
    std::vector<int> out;
    std::string item;
    std::istringstream in(it->second);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw Error(ErrorCode::ParseError, "key " + key + ": empty list element");
        out.push_back(parse_int(key, item));
    }
    if (out.empty()) throw Error(ErrorCode::ParseError, "key " + key + ": empty list");
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open for writing: " + path.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::string trajectory_csv(const Trajectory& traj, const std::string& digest) {
    std::ostringstream out;
    out << "# digest=" << digest << "\n";
    out << "# t,X,Y,Z,phi,cos_theta\n";
    for (size_t i = 0; i < traj.t.size(); ++i) {
        const Vec3& s = traj.s[i];
        PolarState ps = angles_from_bloch(s);
        out << fmt(traj.t[i]) << ',' << fmt(s.x()) << ',' << fmt(s.y()) << ',' << fmt(s.z())
            << ',' << fmt(ps.phi) << ',' << fmt(ps.cos_theta) << "\n";
    }
    return out.str();
}

std::string expectations_csv(const dicke::ExpectationTrace& tr, const std::string& digest) {
    std::ostringstream out;
    out << "# digest=" << digest << "\n";
    out << "# t,jx,jy,jz,purity\n";
    for (size_t i = 0; i < tr.t.size(); ++i)
        out << fmt(tr.t[i]) << ',' << fmt(tr.jx[i]) << ',' << fmt(tr.jy[i]) << ','
            << fmt(tr.jz[i]) << ',' << fmt(tr.purity[i]) << "\n";
    return out.str();
}

std::string spectrum_csv(const std::vector<cplx>& eigs, const std::string& digest) {
    std::ostringstream out;
    out << "# digest=" << digest << "\n";
    out << "# re,im\n";
    for (const cplx& e : eigs) out << fmt(e.real()) << ',' << fmt(e.imag()) << "\n";
    return out.str();
}

std::string envelope_csv(const std::vector<analysis::EnvelopePoint>& env,
                         const std::string& digest) {
    std::ostringstream out;
    out << "# digest=" << digest << "\n";
    out << "# t,amplitude\n";
    for (const auto& e : env) out << fmt(e.t) << ',' << fmt(e.amplitude) << "\n";
    return out.str();
}

std::string collapse_csv(const std::vector<std::vector<analysis::EnvelopePoint>>& envs,
                         const std::vector<double>& sizes, double nu,
                         const std::string& digest) {
    if (envs.size() != sizes.size())
        throw Error(ErrorCode::DimensionMismatch, "one envelope per size required");
    std::ostringstream out;
    out << "# digest=" << digest << "\n";
    out << "# nu=" << fmt(nu) << "\n";
    out << "# size,t,t_scaled,amplitude\n";
    for (size_t k = 0; k < envs.size(); ++k) {
        double scale = std::pow(sizes[k], -nu);
        for (const auto& e : envs[k])
            out << fmt(sizes[k]) << ',' << fmt(e.t) << ',' << fmt(e.t * scale) << ','
                << fmt(e.amplitude) << "\n";
    }
    return out.str();
}

std::string fixed_points_json(const std::vector<FixedPoint>& fps, const std::string& digest) {
    nlohmann::json j;
    j["digest"] = digest;
    j["points"] = nlohmann::json::array();
    for (const FixedPoint& fp : fps) {
        nlohmann::json p;
        p["location"] = {fp.s.x(), fp.s.y(), fp.s.z()};
        p["eigenvalues"] = nlohmann::json::array();
        for (const cplx& e : fp.exponents)
            p["eigenvalues"].push_back({e.real(), e.imag()});
        p["class"] = stability_name(fp.cls);
        p["residual"] = fp.residual;
        j["points"].push_back(std::move(p));
    }
    return j.dump(2) + "\n";
}

std::string density_matrix_json(const Eigen::MatrixXcd& rho, const std::string& digest) {
    nlohmann::json j;
    j["digest"] = digest;
    j["dim"] = rho.rows();
    j["basis"] = "m decreasing from +N/2 to -N/2";
    j["rows"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < rho.cols(); ++k)
            row.push_back({rho(i, k).real(), rho(i, k).imag()});
        j["rows"].push_back(std::move(row));
    }
    return j.dump() + "\n";
}

std::string error_json(const std::string& code, const std::string& message) {
    nlohmann::json j;
    j["error"] = code;
    j["message"] = message;
    return j.dump() + "\n";
}

}  // namespace io
}  // namespace btc
