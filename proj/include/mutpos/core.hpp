#pragma once

#include "mutpos/rng.hpp"

namespace mutpos {

struct Position2D {
  double x = 0.0;
  double y = 0.0;
};

/// Ground-truth state of one UAV. Index 0 is the target.
struct UavTruth {
  int id = 0;
  Position2D true_pos;
  double sigma_p_sq = 0.0;  ///< self-positioning error variance, m^2
  double sigma_d_sq = 0.0;  ///< distance-measurement error variance, m^2
};

/// The five-tuple a reference UAV broadcasts, as received by the target:
/// reported position + its variance, measured distance + its variance.
/// The target's own measurement travels as a pseudo-beacon with
/// source_id 0 and meas_dist 0, see estimators.
struct Beacon {
  int source_id = 0;
  double rep_x = 0.0;
  double rep_y = 0.0;
  double rep_sigma_p_sq = 0.0;
  double meas_dist = 0.0;
  double rep_sigma_d_sq = 0.0;
};

double euclidean_distance(const Position2D& a, const Position2D& b);

/// Self-position measurement: truth plus independent per-coordinate Gaussian
/// noise of variance sigma_p_sq / 2 (total positional error variance
/// sigma_p_sq).
Position2D measure_self_position(const UavTruth& uav, RngStream& rng);

/// Distance measurement between true positions, Gaussian noise of variance
/// `from.sigma_d_sq`, clamped at zero.
double measure_distance(const UavTruth& from, const Position2D& to_pos, RngStream& rng);

}  // namespace mutpos
