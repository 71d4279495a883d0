#pragma once

#include <span>
#include <vector>

#include "mutpos/estimators.hpp"

namespace mutpos {

struct RdadParams {
  double confidence = 0.99;             ///< rejection threshold Xi in (0, 1)
  int upper_iters = 15;                 ///< N
  int lower_iters = 5;                  ///< L
  double sigma_min = 0.31622776601683794;  ///< floor on sigma_circ for scoring, m (sqrt(0.1))
  RgdParams rgd;
};

/// Confidence that a beacon is anomalous: the folded-normal CDF of its
/// absolute corrected residual theta under the claimed error scale.
struct ConfidenceScore {
  int uav_id = 0;
  double theta = 0;      ///< |D_i - meas_dist + mu_circ| at the reference
  double sigma_eff = 0;  ///< max(sigma_circ, sigma_min)
  double xi = 0;         ///< erf(theta / (sigma_eff * sqrt(2))), in [0, 1)
};

ConfidenceScore confidence(const Beacon& beacon, const Position2D& ref_estimate,
                           const ConvertedError& converted, double sigma_min);

struct RdadResult {
  Position2D estimate;
  std::vector<int> accepted_ids;            ///< surviving non-target ids, sorted
  std::vector<int> rejected_ids;            ///< in rejection order
  std::vector<double> objective_trace;      ///< U per upper iteration
  std::vector<Position2D> estimate_trace;   ///< main estimate per upper iteration
  int iterations_used = 0;
  bool degenerate = false;  ///< every non-target beacon was rejected
};

/// Two-stage detection-while-solving loop. Each upper iteration resets a
/// reference to the target's own measurement (the only trustworthy anchor),
/// refines it with one-step descents while rejecting the most suspicious
/// beacon whose confidence exceeds the threshold, then advances the main
/// estimate by one descent step on the surviving set. Rejections are
/// permanent. The input set must contain the source_id 0 pseudo-beacon,
/// which is never scored or rejected.
RdadResult rdad_solve(std::span<const Beacon> beacons, const ErrorSurface& surface,
                      const RdadParams& params);

}  // namespace mutpos
