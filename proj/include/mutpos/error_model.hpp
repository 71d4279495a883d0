#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mutpos/core.hpp"

namespace mutpos {

/// f(d, s) = c00 + c10*d + c01*s + c20*d^2 + c11*d*s + c02*s^2
struct QuadraticSurface {
  double c00 = 0, c10 = 0, c01 = 0, c20 = 0, c11 = 0, c02 = 0;

  double eval(double d, double s) const {
    return c00 + c10 * d + c01 * s + c20 * d * d + c11 * d * s + c02 * s * s;
  }
};

struct FitDomain {
  double d_min = 0, d_max = 0;
  double s_min = 0, s_max = 0;
};

struct FitGrid {
  std::vector<double> d_values;  ///< distance nodes, m
  std::vector<double> s_values;  ///< position-error std-dev nodes, m
  int samples_per_cell = 20000;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeltaStats {
  double mean = 0;
  double stddev = 0;
};

/// Fitted conversion tables for the extra distance error caused by anchoring
/// on a reported instead of the true reference position. Both the mean and
/// the spread of that error are quadratic in (measured distance,
/// position-error sigma); evaluation clamps inputs to the fitted domain.
struct ErrorSurface {
  QuadraticSurface mu_surface;
  QuadraticSurface sigma_surface;
  FitDomain fit_domain;
  double r2_mu = 0;
  double r2_sigma = 0;
  FitGrid grid;
  std::uint64_t seed = 0;

  double mu(double d, double s) const;
  double sigma_delta(double d, double s) const;  ///< clamped to >= 0

  /// All-zero surface: no conversion (mu = 0, sigma_delta = 0 everywhere).
  static ErrorSurface zero();
};

/// Per-beacon converted error: residual bias correction mu_circ and the
/// composed scale sigma_circ with (sigma_circ)^2 = sigma_d^2 + sigma_delta^2.
struct ConvertedError {
  double mu_circ = 0;
  double sigma_circ = 0;
};

/// Brute-force oracle for the extra distance error: each sample is
/// true_dist - sqrt((true_dist + dx)^2 + dy^2) with (dx, dy) drawn per-axis
/// from N(0, sigma_p_sq / 2). Placing the reference on one axis is WLOG by
/// rotational symmetry. Throws std::invalid_argument when n_samples == 0.
std::vector<double> sample_delta_error(double true_dist, double sigma_p_sq,
                                       std::size_t n_samples, RngStream& rng);

/// Streaming mean/stddev of sample_delta_error without materializing samples.
DeltaStats delta_error_stats(double true_dist, double sigma_p_sq,
                             std::size_t n_samples, RngStream& rng);

/// Default fit grid: geometric distance nodes over [5, 25] m, linear sigma
/// nodes over [0.1, 1.6] m. Covers the simulated variance ranges; nearer or
/// farther inputs clamp to the boundary where the correction is either small
/// or flat.
FitGrid default_fit_grid();

/// Samples every grid cell, then least-squares fits the two quadratic
/// surfaces over the per-cell mean and stddev. Deterministic in (grid, seed).
/// Throws FitError when the design matrix is rank-deficient.
ErrorSurface fit_error_surface(const FitGrid& grid, std::uint64_t seed);

/// mu_circ = mu_surface(d, s); sigma_circ = sqrt(sigma_d^2 + sigma_delta^2),
/// with (d, s) taken from the beacon's reported fields and clamped to the
/// fit domain.
ConvertedError convert_error(const Beacon& beacon, const ErrorSurface& surface);

std::string surface_to_json(const ErrorSurface& surface);
ErrorSurface surface_from_json(const std::string& text);
void save_surface(const ErrorSurface& surface, const std::string& path);
ErrorSurface load_surface(const std::string& path);

}  // namespace mutpos
