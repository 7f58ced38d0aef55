#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "btc/analysis.hpp"
#include "btc/dicke.hpp"
#include "btc/model.hpp"

namespace btc {
namespace io {

// Flat key-value config with [section] headers; keys are stored as
// "section.key". '#' and ';' start comments. Values keep internal spaces.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::filesystem::path& path);

// FNV-1a 64 over the canonical "key=value\n" serialization (keys sorted).
std::uint64_t config_digest(const ConfigMap& cfg);
std::string digest_hex(std::uint64_t d);

// typed getters; require() throws MissingKey, the rest fall back to defaults
const std::string& require(const ConfigMap& cfg, const std::string& key);
std::string get_str(const ConfigMap& cfg, const std::string& key, const std::string& dflt);
double get_num(const ConfigMap& cfg, const std::string& key, double dflt);
double require_num(const ConfigMap& cfg, const std::string& key);
int get_int(const ConfigMap& cfg, const std::string& key, int dflt);
std::vector<int> get_int_list(const ConfigMap& cfg, const std::string& key,
                              const std::vector<int>& dflt);

// deterministic shortest-roundtrip float formatting shared by CSV/JSON/SVG
std::string fmt(double v);

void write_text(const std::filesystem::path& path, const std::string& content);

std::string trajectory_csv(const Trajectory& traj, const std::string& digest);
std::string expectations_csv(const dicke::ExpectationTrace& tr, const std::string& digest);
std::string spectrum_csv(const std::vector<cplx>& eigs, const std::string& digest);
std::string envelope_csv(const std::vector<analysis::EnvelopePoint>& env,
                         const std::string& digest);
std::string collapse_csv(const std::vector<std::vector<analysis::EnvelopePoint>>& envs,
                         const std::vector<double>& sizes, double nu,
                         const std::string& digest);
std::string fixed_points_json(const std::vector<FixedPoint>& fps, const std::string& digest);
std::string density_matrix_json(const Eigen::MatrixXcd& rho, const std::string& digest);
std::string error_json(const std::string& code, const std::string& message);

}  // namespace io
}  // namespace btc
