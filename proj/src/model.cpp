#include "btc/model.hpp"

#include <algorithm>
#include <cmath>

namespace btc {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::MissingKey: return "MissingKey";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorCode::NotAFixedPoint: return "NotAFixedPoint";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::InsufficientRange: return "InsufficientRange";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::NoPeak: return "NoPeak";
        case ErrorCode::SizeLimit: return "SizeLimit";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SolverFailure: return "SolverFailure";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

const char* stability_name(Stability s) {
    switch (s) {
        case Stability::Attractor: return "ATTRACTOR";
        case Stability::Repeller: return "REPELLER";
        case Stability::Marginal: return "MARGINAL";
        case Stability::Saddle: return "SADDLE";
    }
    return "?";
}

double ModelParams::scale() const {
    return std::max({std::abs(omega_z), std::abs(omega_x), std::abs(delta_gamma())});
}

void check_params(const ModelParams& mp) {
    if (mp.p < 1 || mp.q < 1)
        throw Error(ErrorCode::DomainError, "p and q must be integers >= 1");
    if (mp.gamma_up < 0 || mp.gamma_down < 0)
        throw Error(ErrorCode::DomainError, "dissipation rates must be >= 0");
    for (double v : {mp.omega_z, mp.omega_x, mp.gamma_up, mp.gamma_down})
        if (!std::isfinite(v))
            throw Error(ErrorCode::DomainError, "parameters must be finite");
}

namespace {

double parse_double(const std::string& key, const std::string& text) {
    try {
        size_t pos = 0;
        double v = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size())
            throw Error(ErrorCode::DomainError, "trailing characters in value for " + key);
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw Error(ErrorCode::DomainError, "cannot parse number for key " + key + ": '" + text + "'");
    }
}

int parse_int(const std::string& key, const std::string& text) {
    double v = parse_double(key, text);
    double r = std::round(v);
    if (std::abs(v - r) > 1e-12 || std::abs(r) > 1e9)
        throw Error(ErrorCode::DomainError, key + " must be an integer, got '" + text + "'");
    return static_cast<int>(r);
}

}  // namespace

ModelParams validate_params(const std::map<std::string, std::string>& raw,
                            const std::string& prefix) {
    auto lookup = [&](const std::string& key) -> const std::string* {
        auto it = raw.find(prefix + key);
        return it == raw.end() ? nullptr : &it->second;
    };
    auto require = [&](const std::string& key) -> const std::string& {
        const std::string* v = lookup(key);
        if (!v) throw Error(ErrorCode::MissingKey, "missing required key " + prefix + key);
        return *v;
    };

    ModelParams mp;
    mp.p = parse_int("p", require("p"));
    mp.q = parse_int("q", require("q"));
    mp.omega_x = parse_double("omega_x", require("omega_x"));
    if (const std::string* v = lookup("omega_z")) mp.omega_z = parse_double("omega_z", *v);
    if (const std::string* v = lookup("gamma_up")) mp.gamma_up = parse_double("gamma_up", *v);
    if (const std::string* v = lookup("gamma_down")) mp.gamma_down = parse_double("gamma_down", *v);
    check_params(mp);
    return mp;
}

Vec3 bloch_from_angles(double theta, double phi, Axis axis) {
    double st = std::sin(theta), ct = std::cos(theta);
    double sp = std::sin(phi), cp = std::cos(phi);
    if (axis == Axis::ZPole) return {st * cp, st * sp, ct};
    // ZPole chart rotated by +pi/2 about y, mapping the pole onto +x
    return {ct, st * sp, -st * cp};
}

PolarState angles_from_bloch(const Vec3& s, Axis axis) {
    double c, u, v;  // c = cos theta; (u, v) span the equatorial plane
    if (axis == Axis::ZPole) {
        c = s.z();
        u = s.x();
        v = s.y();
    } else {
        c = s.x();
        u = -s.z();
        v = s.y();
    }
    double n = s.norm();
    if (n > 0) c /= n;
    c = std::clamp(c, -1.0, 1.0);
    PolarState ps;
    ps.axis = axis;
    ps.cos_theta = c;
    double r_eq = std::hypot(u, v);
    if (r_eq < 1e-14 * std::max(1.0, n)) {
        ps.phi = 0;
        ps.pole_singular = true;
    } else {
        ps.phi = std::atan2(v, u);
    }
    return ps;
}

}  // namespace btc
