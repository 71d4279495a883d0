#pragma once

#include <span>
#include <variant>
#include <vector>

#include "mutpos/core.hpp"

namespace mutpos {

enum class AttackMode {
  kDeterioration,  ///< added noise, inflated variances honestly reported
  kVariance,       ///< added noise, reported variances untouched
  kBias,           ///< constant position offset, everything else untouched
  kManipulation,   ///< position offset plus variances tampered to zero
};

/// Attack vector for the noise modes: variance added to the position and
/// distance measurements, m^2 each.
struct NoiseAttackVector {
  double sigma_p_sq_delta = 0;
  double sigma_d_sq_delta = 0;
};

/// Attack vector for the offset modes: constant position bias, m.
struct BiasAttackVector {
  double nu_x = 0;
  double nu_y = 0;
};

using AttackVector = std::variant<NoiseAttackVector, BiasAttackVector>;

struct AttackConfig {
  AttackMode mode = AttackMode::kManipulation;
  AttackVector av = BiasAttackVector{5.0, 5.0};
  int num_compromised = 3;   ///< J
  double penetration = 0.5;  ///< r_atk, probability a compromised beacon is hit
  bool coordinated = true;   ///< one shared penetration draw vs per-UAV draws
};

/// Uniformly random J-subset of the non-target ids {1..num_uavs}; sorted.
/// Throws when J exceeds num_uavs.
std::vector<int> select_compromised(int num_uavs, const AttackConfig& config, RngStream& rng);

/// The compromised ids actually attacked this round. Coordinated: a single
/// Bernoulli(penetration) draw gates the whole set; uncoordinated: one draw
/// per id. Input must be sorted for reproducible per-id draws.
std::vector<int> draw_attack_mask(std::span<const int> compromised, const AttackConfig& config,
                                  RngStream& rng);

/// The transformed beacon for one attacked transmission. Throws when the
/// attack vector family does not match the mode.
Beacon apply_attack(const Beacon& beacon, AttackMode mode, const AttackVector& av,
                    RngStream& rng);

}  // namespace mutpos
