#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mutpos/anomaly.hpp"
#include "mutpos/attacks.hpp"
#include "mutpos/estimators.hpp"

namespace mutpos {

enum class EstimatorKind { kLse, kRgd, kRdad };

struct SimConfig {
  double map_size = 30.0;                            ///< square side, m
  int num_uavs = 10;                                 ///< I + 1, including the target
  std::array<double, 2> sigma_p_sq_range{0.1, 2.1};  ///< per-UAV U(lo, hi), m^2
  std::array<double, 2> sigma_d_sq_range{0.1, 0.9};  ///< per-UAV U(lo, hi), m^2
  int trials = 1000;
  std::optional<AttackConfig> attack;
  EstimatorKind estimator = EstimatorKind::kRgd;
  RgdParams rgd;
  RdadParams rdad;
  std::uint64_t seed = 1;
};

struct Scenario {
  std::vector<UavTruth> truths;   ///< index 0 is the target
  std::vector<Beacon> beacons;    ///< pseudo-beacon for the target first
};

/// One random deployment plus a clean snapshot beacon set. Deterministic in
/// (config.seed, trial_index) and independent of estimator choice, so every
/// estimator and threshold sees identical trials.
Scenario generate_scenario(const SimConfig& config, std::uint64_t trial_index);

struct TrialRecord {
  std::uint64_t trial_index = 0;
  Position2D true_target;
  double initial_error = 0;            ///< raw self-positioning error
  std::vector<double> error_trace;     ///< per-iteration error, right-padded to the cap
  double final_error = 0;
  std::vector<int> attacked_ids;       ///< beacons actually hit this trial
  std::vector<int> accepted_ids;       ///< detection output (RDAD only)
  std::vector<int> rejected_ids;
  bool degenerate = false;
};

TrialRecord run_trial(const SimConfig& config, const ErrorSurface& surface,
                      std::uint64_t trial_index);

/// Runs config.trials independent trials; records come back in trial order
/// regardless of thread count.
std::vector<TrialRecord> run_trials(const SimConfig& config, const ErrorSurface& surface,
                                    int threads = 1);

/// Per-iteration aggregate error curve; index 0 is the raw self-positioning
/// error before any iteration.
struct ConvergenceCurve {
  std::vector<double> mean_error;
  std::vector<double> rmse;
  std::vector<double> p10, p50, p90;
};

ConvergenceCurve aggregate_convergence(std::span<const TrialRecord> records);

struct DetectionStats {
  std::optional<double> r_fa;  ///< benign rejected / benign total; empty when no benign
  std::optional<double> r_md;  ///< malicious accepted / malicious total; empty when no malicious
  long long benign_rejected = 0;
  long long benign_total = 0;
  long long malicious_accepted = 0;
  long long malicious_total = 0;
};

DetectionStats detection_stats(std::span<const TrialRecord> records);

struct RocPoint {
  double xi = 0;
  DetectionStats detection;
  double mean_error = 0;  ///< mean final positioning error
};

struct RocCurve {
  std::vector<RocPoint> points;  ///< sorted by xi
};

/// Full Monte-Carlo per threshold with common random numbers: the same
/// (seed, trial) scenarios and attack draws are replayed for every xi.
RocCurve roc_sweep(const SimConfig& config, const ErrorSurface& surface,
                   std::span<const double> xi_grid, int threads = 1);

/// True when every swept point sits within `margin` of the blind-guess line
/// r_md = 1 - r_fa, i.e. the detector does no better than random rejection.
bool near_blind(const RocCurve& curve, double margin = 0.15);

}  // namespace mutpos
