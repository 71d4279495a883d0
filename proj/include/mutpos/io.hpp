#pragma once

#include <string>
#include <vector>

#include "mutpos/error_model.hpp"
#include "mutpos/sim.hpp"

namespace mutpos {

inline constexpr const char* kToolVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run-level settings that live next to SimConfig in the config file.
struct RunConfig {
  SimConfig sim;
  FitGrid fit_grid;             ///< grid for cmd_fit / auto-fit
  std::uint64_t fit_seed = 42;
  std::string surface_cache = "surface.json";
};

/// Parses a config JSON document. Unknown keys and invalid values are hard
/// errors naming the offending key path.
RunConfig config_from_json(const std::string& text);
RunConfig default_config();
std::string config_to_json(const RunConfig& config);

std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);
std::string attack_mode_name(AttackMode mode);
AttackMode attack_mode_from_name(const std::string& name);

/// Shortest round-trip decimal rendering; identical doubles always render to
/// identical text.
std::string format_double(double v);

std::string curve_to_csv(const ConvergenceCurve& curve);
std::string curve_to_json_text(const ConvergenceCurve& curve);
std::string roc_to_csv(const RocCurve& curve);
std::string roc_to_json_text(const RocCurve& curve);

/// Everything needed to replay a run byte-identically: the resolved config,
/// the surface reference, and the output paths. Timestamps are informational
/// and never feed into the outputs.
struct RunManifest {
  std::string kind;  ///< "mc" or "roc"
  std::string created;
  int threads = 1;
  std::string format = "csv";  ///< "csv" or "json"
  RunConfig config;
  std::vector<double> xi_grid;      ///< roc only
  std::string surface_path;
  std::uint64_t surface_seed = 0;
  double surface_r2_mu = 0;
  double surface_r2_sigma = 0;
  std::string result_path;
  std::string manifest_path;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mutpos
