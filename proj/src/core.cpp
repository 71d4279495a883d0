#include "mutpos/core.hpp"

#include <algorithm>
#include <cmath>

namespace mutpos {

double euclidean_distance(const Position2D& a, const Position2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Position2D measure_self_position(const UavTruth& uav, RngStream& rng) {
  const double s = std::sqrt(uav.sigma_p_sq / 2.0);
  return {uav.true_pos.x + rng.normal(0.0, s), uav.true_pos.y + rng.normal(0.0, s)};
}

double measure_distance(const UavTruth& from, const Position2D& to_pos, RngStream& rng) {
  const double d = euclidean_distance(from.true_pos, to_pos);
  return std::max(0.0, d + rng.normal(0.0, std::sqrt(from.sigma_d_sq)));
}

}  // namespace mutpos
