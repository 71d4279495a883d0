#include "mutpos/error_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mutpos {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double ErrorSurface::mu(double d, double s) const {
  return mu_surface.eval(clamp(d, fit_domain.d_min, fit_domain.d_max),
                         clamp(s, fit_domain.s_min, fit_domain.s_max));
}

double ErrorSurface::sigma_delta(double d, double s) const {
  return std::max(0.0, sigma_surface.eval(clamp(d, fit_domain.d_min, fit_domain.d_max),
                                          clamp(s, fit_domain.s_min, fit_domain.s_max)));
}

ErrorSurface ErrorSurface::zero() {
  ErrorSurface out;
  out.fit_domain = {0.0, 1e12, 0.0, 1e12};
  out.r2_mu = 1.0;
  out.r2_sigma = 1.0;
  return out;
}

std::vector<double> sample_delta_error(double true_dist, double sigma_p_sq,
                                       std::size_t n_samples, RngStream& rng) {
  if (n_samples == 0) throw std::invalid_argument("sample_delta_error: n_samples must be >= 1");
  const double s = std::sqrt(sigma_p_sq / 2.0);
  std::vector<double> out(n_samples);
  for (auto& v : out) {
    const double dx = rng.normal(0.0, s);
    const double dy = rng.normal(0.0, s);
    v = true_dist - std::hypot(true_dist + dx, dy);
  }
  return out;
}

DeltaStats delta_error_stats(double true_dist, double sigma_p_sq,
                             std::size_t n_samples, RngStream& rng) {
  if (n_samples == 0) throw std::invalid_argument("delta_error_stats: n_samples must be >= 1");
  const double s = std::sqrt(sigma_p_sq / 2.0);
  // Welford
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double dx = rng.normal(0.0, s);
    const double dy = rng.normal(0.0, s);
    const double v = true_dist - std::hypot(true_dist + dx, dy);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  return {mean, std::sqrt(m2 / static_cast<double>(n_samples))};
}

FitGrid default_fit_grid() {
  FitGrid grid;
  // 12 geometric nodes from 5 m to 25 m; the mean error falls off like 1/d,
  // so nodes cluster where the curvature lives.
  const int nd = 12;
  grid.d_values.reserve(nd);
  for (int i = 0; i < nd; ++i)
    grid.d_values.push_back(5.0 * std::pow(5.0, static_cast<double>(i) / (nd - 1)));
  for (double s = 0.1; s <= 1.6 + 1e-12; s += 0.15) grid.s_values.push_back(s);
  grid.samples_per_cell = 20000;
  return grid;
}

ErrorSurface fit_error_surface(const FitGrid& grid, std::uint64_t seed) {
  if (grid.d_values.empty() || grid.s_values.empty())
    throw FitError("fit_error_surface: empty grid");
  if (grid.samples_per_cell < 100)
    throw FitError("fit_error_surface: samples_per_cell must be >= 100");

  const std::size_t n_cells = grid.d_values.size() * grid.s_values.size();
  Eigen::MatrixXd design(n_cells, 6);
  Eigen::VectorXd mu_target(n_cells);
  Eigen::VectorXd sd_target(n_cells);

  RngStream fit_rng = RngStream(seed).stream("error-surface-fit");
  std::size_t row = 0;
  for (const double d : grid.d_values) {
    for (const double s : grid.s_values) {
      RngStream cell_rng = fit_rng.stream(static_cast<std::uint64_t>(row));
      const DeltaStats st =
          delta_error_stats(d, s * s, static_cast<std::size_t>(grid.samples_per_cell), cell_rng);
      design.row(row) << 1.0, d, s, d * d, d * s, s * s;
      mu_target(row) = st.mean;
      sd_target(row) = st.stddev;
      ++row;
    }
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 6)
    throw FitError("fit_error_surface: singular normal equations (degenerate grid)");

  const Eigen::VectorXd mu_coef = qr.solve(mu_target);
  const Eigen::VectorXd sd_coef = qr.solve(sd_target);

  const auto r_squared = [&](const Eigen::VectorXd& coef, const Eigen::VectorXd& y) {
    const double ss_res = (design * coef - y).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  };

  const auto to_surface = [](const Eigen::VectorXd& c) {
    return QuadraticSurface{c(0), c(1), c(2), c(3), c(4), c(5)};
  };

  ErrorSurface out;
  out.mu_surface = to_surface(mu_coef);
  out.sigma_surface = to_surface(sd_coef);
  out.fit_domain = {
      *std::min_element(grid.d_values.begin(), grid.d_values.end()),
      *std::max_element(grid.d_values.begin(), grid.d_values.end()),
      *std::min_element(grid.s_values.begin(), grid.s_values.end()),
      *std::max_element(grid.s_values.begin(), grid.s_values.end()),
  };
  out.r2_mu = r_squared(mu_coef, mu_target);
  out.r2_sigma = r_squared(sd_coef, sd_target);
  out.grid = grid;
  out.seed = seed;
  return out;
}

ConvertedError convert_error(const Beacon& beacon, const ErrorSurface& surface) {
  const double s = std::sqrt(std::max(0.0, beacon.rep_sigma_p_sq));
  const double mu = surface.mu(beacon.meas_dist, s);
  const double sigma_delta = surface.sigma_delta(beacon.meas_dist, s);
  const double sigma_d_sq = std::max(0.0, beacon.rep_sigma_d_sq);
  return {mu, std::sqrt(sigma_d_sq + sigma_delta * sigma_delta)};
}

namespace {

nlohmann::json quad_to_json(const QuadraticSurface& q) {
  return {{"c00", q.c00}, {"c10", q.c10}, {"c01", q.c01},
          {"c20", q.c20}, {"c11", q.c11}, {"c02", q.c02}};
}

QuadraticSurface quad_from_json(const nlohmann::json& j) {
  QuadraticSurface q;
  q.c00 = j.at("c00").get<double>();
  q.c10 = j.at("c10").get<double>();
  q.c01 = j.at("c01").get<double>();
  q.c20 = j.at("c20").get<double>();
  q.c11 = j.at("c11").get<double>();
  q.c02 = j.at("c02").get<double>();
  return q;
}

}  // namespace

std::string surface_to_json(const ErrorSurface& surface) {
  nlohmann::json j;
  j["kind"] = "error_surface";
  j["seed"] = surface.seed;
  j["grid"] = {{"d_values", surface.grid.d_values},
               {"s_values", surface.grid.s_values},
               {"samples_per_cell", surface.grid.samples_per_cell}};
  j["domain"] = {{"d_min", surface.fit_domain.d_min},
                 {"d_max", surface.fit_domain.d_max},
                 {"s_min", surface.fit_domain.s_min},
                 {"s_max", surface.fit_domain.s_max}};
  j["mu"] = quad_to_json(surface.mu_surface);
  j["sigma"] = quad_to_json(surface.sigma_surface);
  j["r2"] = {{"mu", surface.r2_mu}, {"sigma", surface.r2_sigma}};
  return j.dump(2) + "\n";
}

ErrorSurface surface_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("kind", "") != "error_surface")
    throw std::runtime_error("surface_from_json: not an error_surface file");
  ErrorSurface out;
  out.seed = j.at("seed").get<std::uint64_t>();
  out.grid.d_values = j.at("grid").at("d_values").get<std::vector<double>>();
  out.grid.s_values = j.at("grid").at("s_values").get<std::vector<double>>();
  out.grid.samples_per_cell = j.at("grid").at("samples_per_cell").get<int>();
  out.fit_domain.d_min = j.at("domain").at("d_min").get<double>();
  out.fit_domain.d_max = j.at("domain").at("d_max").get<double>();
  out.fit_domain.s_min = j.at("domain").at("s_min").get<double>();
  out.fit_domain.s_max = j.at("domain").at("s_max").get<double>();
  out.mu_surface = quad_from_json(j.at("mu"));
  out.sigma_surface = quad_from_json(j.at("sigma"));
  out.r2_mu = j.at("r2").at("mu").get<double>();
  out.r2_sigma = j.at("r2").at("sigma").get<double>();
  return out;
}

void save_surface(const ErrorSurface& surface, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_surface: cannot open " + path);
  f << surface_to_json(surface);
  if (!f) throw std::runtime_error("save_surface: write failed for " + path);
}

ErrorSurface load_surface(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_surface: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return surface_from_json(ss.str());
}

}  // namespace mutpos
