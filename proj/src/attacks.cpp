#include "mutpos/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mutpos {

std::vector<int> select_compromised(int num_uavs, const AttackConfig& config, RngStream& rng) {
  const int j = config.num_compromised;
  if (j < 0 || j > num_uavs)
    throw std::invalid_argument("select_compromised: num_compromised exceeds UAV count");
  std::vector<int> ids(num_uavs);
  std::iota(ids.begin(), ids.end(), 1);
  for (int k = 0; k < j; ++k) {
    const auto pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_uavs - k)));
    std::swap(ids[k], ids[pick]);
  }
  ids.resize(j);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<int> draw_attack_mask(std::span<const int> compromised, const AttackConfig& config,
                                  RngStream& rng) {
  std::vector<int> mask;
  if (config.coordinated) {
    if (rng.bernoulli(config.penetration))
      mask.assign(compromised.begin(), compromised.end());
  } else {
    for (const int id : compromised)
      if (rng.bernoulli(config.penetration)) mask.push_back(id);
  }
  return mask;
}

namespace {

const NoiseAttackVector& noise_av(const AttackVector& av) {
  const auto* v = std::get_if<NoiseAttackVector>(&av);
  if (!v) throw std::invalid_argument("apply_attack: noise-mode attack needs a NoiseAttackVector");
  return *v;
}

const BiasAttackVector& bias_av(const AttackVector& av) {
  const auto* v = std::get_if<BiasAttackVector>(&av);
  if (!v) throw std::invalid_argument("apply_attack: bias-mode attack needs a BiasAttackVector");
  return *v;
}

}  // namespace

Beacon apply_attack(const Beacon& beacon, AttackMode mode, const AttackVector& av,
                    RngStream& rng) {
  Beacon out = beacon;
  switch (mode) {
    case AttackMode::kDeterioration:
    case AttackMode::kVariance: {
      const NoiseAttackVector& v = noise_av(av);
      const double sp = std::sqrt(v.sigma_p_sq_delta / 2.0);
      out.rep_x += rng.normal(0.0, sp);
      out.rep_y += rng.normal(0.0, sp);
      out.meas_dist = std::max(0.0, out.meas_dist + rng.normal(0.0, std::sqrt(v.sigma_d_sq_delta)));
      if (mode == AttackMode::kDeterioration) {
        out.rep_sigma_p_sq += v.sigma_p_sq_delta;
        out.rep_sigma_d_sq += v.sigma_d_sq_delta;
      }
      break;
    }
    case AttackMode::kBias: {
      const BiasAttackVector& v = bias_av(av);
      out.rep_x += v.nu_x;
      out.rep_y += v.nu_y;
      break;
    }
    case AttackMode::kManipulation: {
      const BiasAttackVector& v = bias_av(av);
      out.rep_x += v.nu_x;
      out.rep_y += v.nu_y;
      out.rep_sigma_p_sq = 0.0;
      out.rep_sigma_d_sq = 0.0;
      break;
    }
  }
  return out;
}

}  // namespace mutpos
