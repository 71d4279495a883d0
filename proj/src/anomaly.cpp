#include "mutpos/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mutpos {

ConfidenceScore confidence(const Beacon& beacon, const Position2D& ref_estimate,
                           const ConvertedError& converted, double sigma_min) {
  ConfidenceScore score;
  score.uav_id = beacon.source_id;
  score.sigma_eff = std::max(converted.sigma_circ, sigma_min);
  const double d = euclidean_distance({beacon.rep_x, beacon.rep_y}, ref_estimate);
  score.theta = std::abs(d - beacon.meas_dist + converted.mu_circ);
  const double xi = std::erf(score.theta / (score.sigma_eff * std::sqrt(2.0)));
  score.xi = std::min(xi, std::nextafter(1.0, 0.0));
  return score;
}

RdadResult rdad_solve(std::span<const Beacon> beacons, const ErrorSurface& surface,
                      const RdadParams& params) {
  if (beacons.empty()) throw std::invalid_argument("rdad_solve: empty beacon set");
  std::vector<Beacon> survivors(beacons.begin(), beacons.end());
  std::vector<ConvertedError> converted = convert_beacons(survivors, surface);

  const auto anchor_it = std::find_if(survivors.begin(), survivors.end(),
                                      [](const Beacon& b) { return b.source_id == 0; });
  if (anchor_it == survivors.end())
    throw std::invalid_argument("rdad_solve: missing source_id 0 pseudo-beacon");
  const Position2D anchor{anchor_it->rep_x, anchor_it->rep_y};

  RdadResult result;
  Position2D estimate = anchor;
  StepState upper{params.rgd.alpha, std::numeric_limits<double>::infinity()};

  for (int n = 0; n < params.upper_iters; ++n) {
    Position2D ref = anchor;
    for (int l = 0; l < params.lower_iters; ++l) {
      // One-step refinement on a private copy of the step state; only the
      // upper stage's own branch may discount alpha.
      const StepOutcome lo = rgd_step(ref, survivors, converted, params.rgd,
                                      StepState{upper.alpha, std::numeric_limits<double>::infinity()});
      ref = lo.estimate;

      // Most suspicious non-target beacon; saturation-safe ordering via
      // theta / sigma_eff (monotone in xi), ties to the lowest id.
      int best_index = -1;
      double best_z = -1.0;
      ConfidenceScore best_score;
      for (std::size_t i = 0; i < survivors.size(); ++i) {
        if (survivors[i].source_id == 0) continue;
        const ConfidenceScore sc =
            confidence(survivors[i], ref, converted[i], params.sigma_min);
        const double z = sc.theta / sc.sigma_eff;
        if (best_index < 0 || z > best_z ||
            (z == best_z && sc.uav_id < best_score.uav_id)) {
          best_index = static_cast<int>(i);
          best_z = z;
          best_score = sc;
        }
      }
      if (best_index < 0) break;  // only the pseudo-beacon left
      if (best_score.xi > params.confidence) {
        result.rejected_ids.push_back(best_score.uav_id);
        survivors.erase(survivors.begin() + best_index);
        converted.erase(converted.begin() + best_index);
      } else {
        break;
      }
    }

    if (survivors.size() == 1) {
      // Nothing left to triangulate against; fall back to the self-measurement.
      estimate = anchor;
      result.estimate_trace.push_back(estimate);
      result.objective_trace.push_back(
          objective(estimate, survivors, converted));
      result.degenerate = true;
      break;
    }

    const StepOutcome step = rgd_step(estimate, survivors, converted, params.rgd, upper);
    estimate = step.estimate;
    upper = step.state;
    result.objective_trace.push_back(step.objective);
    result.estimate_trace.push_back(estimate);
    if (step.converged) break;
  }

  result.estimate = estimate;
  result.iterations_used = static_cast<int>(result.objective_trace.size());
  for (const Beacon& b : survivors)
    if (b.source_id != 0) result.accepted_ids.push_back(b.source_id);
  std::sort(result.accepted_ids.begin(), result.accepted_ids.end());
  return result;
}

}  // namespace mutpos
