#pragma once

#include <limits>
#include <span>
#include <vector>

#include "mutpos/core.hpp"
#include "mutpos/error_model.hpp"

namespace mutpos {

struct RgdParams {
  double epsilon = 1e-6;   ///< relative convergence floor
  int max_iters = 15;      ///< iteration cap K
  double alpha = 0.9;      ///< initial step-length factor
  double gamma = 0.9;      ///< step-length discount on over-descent
  double momentum = 1e-5;
};

/// Mutable solver state carried between steps: the current step-length factor
/// and the previous objective value (infinite before the first step, so the
/// first step can never trigger the discount branch).
struct StepState {
  double alpha = 0.9;
  double last_objective = std::numeric_limits<double>::infinity();
};

struct WeightedResidual {
  int source_id = 0;
  double distance = 0;    ///< D_i from the estimate to the reported position
  int sign = 0;           ///< sgn(D_i - meas_dist + mu_circ), sgn(0) = 0
  double mu_circ = 0;
  double sigma_circ = 0;  ///< floored away from zero
};

struct WeightedResidualSet {
  std::vector<WeightedResidual> items;
  double sigma_max = 0;  ///< max sigma_circ over active beacons
};

struct RgdResult {
  Position2D estimate;
  std::vector<double> objective_trace;      ///< U_k per iteration
  std::vector<Position2D> estimate_trace;   ///< post-update estimate per iteration
  int iterations_used = 0;
  StepState step_state;
};

struct StepOutcome {
  Position2D estimate;   ///< post-update estimate
  double objective;      ///< U_k, evaluated at the pre-update estimate
  StepState state;       ///< state for the next step (alpha possibly discounted)
  bool converged = false;
};

/// Converts every beacon once up front. The target's pseudo-beacon
/// (source_id 0) bypasses the surface: mu_circ = 0 and sigma_circ equals its
/// reported self-positioning sigma, since its "distance" residual is the
/// self-measurement offset itself.
std::vector<ConvertedError> convert_beacons(std::span<const Beacon> beacons,
                                            const ErrorSurface& surface);

WeightedResidualSet weighted_residuals(const Position2D& estimate,
                                       std::span<const Beacon> beacons,
                                       std::span<const ConvertedError> converted);

/// U = (1/n) * sum |D_i - meas_dist_i + mu_i| * sigma_max / sigma_i, >= 0.
double objective(const Position2D& estimate, std::span<const Beacon> beacons,
                 std::span<const ConvertedError> converted);

/// One descent iteration: signed unit pulls toward/away from each reported
/// position, weighted by sigma_max / sigma_i, plus the momentum term; the
/// returned objective is evaluated at the incoming estimate and compared
/// against state.last_objective for the discount/convergence branches.
StepOutcome rgd_step(const Position2D& estimate, std::span<const Beacon> beacons,
                     std::span<const ConvertedError> converted, const RgdParams& params,
                     const StepState& state);

RgdResult rgd_solve_converted(const Position2D& init, std::span<const Beacon> beacons,
                              std::span<const ConvertedError> converted,
                              const RgdParams& params);

RgdResult rgd_solve(const Position2D& init, std::span<const Beacon> beacons,
                    const ErrorSurface& surface, const RgdParams& params);

/// Baseline: identical machinery with mu_circ = 0 and one shared sigma, i.e.
/// the unweighted least-absolute-residual descent.
RgdResult lse_solve(const Position2D& init, std::span<const Beacon> beacons,
                    const RgdParams& params);

}  // namespace mutpos
