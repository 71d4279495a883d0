#include "mutpos/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace mutpos {

namespace {

constexpr double kDistanceFloor = 1e-9;  // guards 1/D_i at coincident points
constexpr double kSigmaFloor = 1e-9;     // guards 0/0 weights for zero-variance input

void require_nonempty(std::span<const Beacon> beacons) {
  if (beacons.empty()) throw std::invalid_argument("estimator: empty beacon set");
}

}  // namespace

std::vector<ConvertedError> convert_beacons(std::span<const Beacon> beacons,
                                            const ErrorSurface& surface) {
  std::vector<ConvertedError> out;
  out.reserve(beacons.size());
  for (const Beacon& b : beacons) {
    if (b.source_id == 0) {
      out.push_back({0.0, std::sqrt(std::max(0.0, b.rep_sigma_p_sq))});
    } else {
      out.push_back(convert_error(b, surface));
    }
  }
  return out;
}

WeightedResidualSet weighted_residuals(const Position2D& estimate,
                                       std::span<const Beacon> beacons,
                                       std::span<const ConvertedError> converted) {
  require_nonempty(beacons);
  WeightedResidualSet set;
  set.items.reserve(beacons.size());
  set.sigma_max = 0.0;
  for (std::size_t i = 0; i < beacons.size(); ++i) {
    const Beacon& b = beacons[i];
    const double d = std::max(
        kDistanceFloor, euclidean_distance({b.rep_x, b.rep_y}, estimate));
    const double r = d - b.meas_dist + converted[i].mu_circ;
    const int sign = (r > 0.0) - (r < 0.0);
    const double sigma = std::max(kSigmaFloor, converted[i].sigma_circ);
    set.items.push_back({b.source_id, d, sign, converted[i].mu_circ, sigma});
    set.sigma_max = std::max(set.sigma_max, sigma);
  }
  return set;
}

double objective(const Position2D& estimate, std::span<const Beacon> beacons,
                 std::span<const ConvertedError> converted) {
  const WeightedResidualSet set = weighted_residuals(estimate, beacons, converted);
  const double n = static_cast<double>(set.items.size());
  double u = 0.0;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const WeightedResidual& it = set.items[i];
    const double r = it.distance - beacons[i].meas_dist + it.mu_circ;
    u += std::abs(r) * (set.sigma_max / it.sigma_circ);
  }
  return u / n;
}

StepOutcome rgd_step(const Position2D& estimate, std::span<const Beacon> beacons,
                     std::span<const ConvertedError> converted, const RgdParams& params,
                     const StepState& state) {
  require_nonempty(beacons);
  const WeightedResidualSet set = weighted_residuals(estimate, beacons, converted);
  const double n = static_cast<double>(set.items.size());

  double dx = params.momentum * estimate.x;
  double dy = params.momentum * estimate.y;
  double u = 0.0;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const WeightedResidual& it = set.items[i];
    const Beacon& b = beacons[i];
    const double w = set.sigma_max / it.sigma_circ;
    const double r = it.distance - b.meas_dist + it.mu_circ;
    u += std::abs(r) * w;
    const double pull = static_cast<double>(it.sign) * w / it.distance;
    dx += (state.alpha / n) * pull * (b.rep_x - estimate.x);
    dy += (state.alpha / n) * pull * (b.rep_y - estimate.y);
  }
  u /= n;

  StepOutcome out;
  out.estimate = {estimate.x + dx, estimate.y + dy};
  out.objective = u;
  const bool over_descended = u > state.last_objective;
  out.state.alpha = over_descended ? state.alpha * params.gamma : state.alpha;
  out.state.last_objective = u;
  out.converged = !over_descended && std::isfinite(state.last_objective) &&
                  (state.last_objective - u) / state.last_objective <= params.epsilon;
  return out;
}

RgdResult rgd_solve_converted(const Position2D& init, std::span<const Beacon> beacons,
                              std::span<const ConvertedError> converted,
                              const RgdParams& params) {
  require_nonempty(beacons);
  RgdResult result;
  result.step_state = {params.alpha, std::numeric_limits<double>::infinity()};
  Position2D estimate = init;
  for (int k = 0; k < params.max_iters; ++k) {
    const StepOutcome step = rgd_step(estimate, beacons, converted, params, result.step_state);
    estimate = step.estimate;
    result.step_state = step.state;
    result.objective_trace.push_back(step.objective);
    result.estimate_trace.push_back(estimate);
    if (step.converged) break;
  }
  result.estimate = estimate;
  result.iterations_used = static_cast<int>(result.objective_trace.size());
  return result;
}

RgdResult rgd_solve(const Position2D& init, std::span<const Beacon> beacons,
                    const ErrorSurface& surface, const RgdParams& params) {
  const std::vector<ConvertedError> converted = convert_beacons(beacons, surface);
  return rgd_solve_converted(init, beacons, converted, params);
}

RgdResult lse_solve(const Position2D& init, std::span<const Beacon> beacons,
                    const RgdParams& params) {
  const std::vector<ConvertedError> converted(beacons.size(), ConvertedError{0.0, 1.0});
  return rgd_solve_converted(init, beacons, converted, params);
}

}  // namespace mutpos
