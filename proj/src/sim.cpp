#include "mutpos/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace mutpos {

namespace {

RngStream trial_stream(const SimConfig& config, std::uint64_t trial_index) {
  return RngStream(config.seed).stream("trial").stream(trial_index);
}

double percentile(std::vector<double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

Scenario generate_scenario(const SimConfig& config, std::uint64_t trial_index) {
  if (config.num_uavs < 1) throw std::invalid_argument("generate_scenario: need at least one UAV");
  RngStream trial = trial_stream(config, trial_index);
  RngStream deploy = trial.stream("deploy");
  RngStream variance = trial.stream("variance");

  Scenario sc;
  sc.truths.reserve(config.num_uavs);
  for (int i = 0; i < config.num_uavs; ++i) {
    UavTruth u;
    u.id = i;
    u.true_pos = {deploy.uniform(0.0, config.map_size), deploy.uniform(0.0, config.map_size)};
    u.sigma_p_sq = variance.uniform(config.sigma_p_sq_range[0], config.sigma_p_sq_range[1]);
    u.sigma_d_sq = variance.uniform(config.sigma_d_sq_range[0], config.sigma_d_sq_range[1]);
    sc.truths.push_back(u);
  }

  sc.beacons.reserve(config.num_uavs);
  for (int i = 0; i < config.num_uavs; ++i) {
    RngStream meas = trial.stream("uav").stream(static_cast<std::uint64_t>(i));
    const UavTruth& u = sc.truths[i];
    const Position2D rep = measure_self_position(u, meas);
    if (i == 0) {
      // The target's own measurement as a pseudo-beacon: zero distance,
      // zero distance variance.
      sc.beacons.push_back({0, rep.x, rep.y, u.sigma_p_sq, 0.0, 0.0});
    } else {
      const double d = measure_distance(u, sc.truths[0].true_pos, meas);
      sc.beacons.push_back({i, rep.x, rep.y, u.sigma_p_sq, d, u.sigma_d_sq});
    }
  }
  return sc;
}

TrialRecord run_trial(const SimConfig& config, const ErrorSurface& surface,
                      std::uint64_t trial_index) {
  Scenario sc = generate_scenario(config, trial_index);

  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.true_target = sc.truths[0].true_pos;

  if (config.attack) {
    RngStream atk = trial_stream(config, trial_index).stream("attack");
    RngStream select = atk.stream("select");
    RngStream mask_rng = atk.stream("mask");
    const std::vector<int> compromised =
        select_compromised(config.num_uavs - 1, *config.attack, select);
    rec.attacked_ids = draw_attack_mask(compromised, *config.attack, mask_rng);
    for (const int id : rec.attacked_ids) {
      RngStream noise = atk.stream("noise").stream(static_cast<std::uint64_t>(id));
      sc.beacons[id] = apply_attack(sc.beacons[id], config.attack->mode, config.attack->av, noise);
    }
  }

  const Position2D init{sc.beacons[0].rep_x, sc.beacons[0].rep_y};
  rec.initial_error = euclidean_distance(init, rec.true_target);

  std::vector<Position2D> trace;
  int cap = config.rgd.max_iters;
  switch (config.estimator) {
    case EstimatorKind::kLse: {
      const RgdResult r = lse_solve(init, sc.beacons, config.rgd);
      trace = r.estimate_trace;
      break;
    }
    case EstimatorKind::kRgd: {
      const RgdResult r = rgd_solve(init, sc.beacons, surface, config.rgd);
      trace = r.estimate_trace;
      break;
    }
    case EstimatorKind::kRdad: {
      const RdadResult r = rdad_solve(sc.beacons, surface, config.rdad);
      trace = r.estimate_trace;
      cap = config.rdad.upper_iters;
      rec.accepted_ids = r.accepted_ids;
      rec.rejected_ids = r.rejected_ids;
      rec.degenerate = r.degenerate;
      break;
    }
  }

  rec.error_trace.reserve(cap);
  for (const Position2D& p : trace)
    rec.error_trace.push_back(euclidean_distance(p, rec.true_target));
  if (rec.error_trace.empty()) rec.error_trace.push_back(rec.initial_error);
  rec.final_error = rec.error_trace.back();
  while (static_cast<int>(rec.error_trace.size()) < cap)
    rec.error_trace.push_back(rec.final_error);
  std::sort(rec.attacked_ids.begin(), rec.attacked_ids.end());
  return rec;
}

std::vector<TrialRecord> run_trials(const SimConfig& config, const ErrorSurface& surface,
                                    int threads) {
  const int n = config.trials;
  if (n < 1) throw std::invalid_argument("run_trials: trials must be >= 1");
  std::vector<TrialRecord> records(n);
  if (threads <= 1) {
    for (int t = 0; t < n; ++t) records[t] = run_trial(config, surface, t);
    return records;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next.fetch_add(1); t < n; t = next.fetch_add(1))
      records[t] = run_trial(config, surface, t);
  };
  std::vector<std::thread> pool;
  const int k = std::min(threads, n);
  pool.reserve(k);
  for (int i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return records;
}

ConvergenceCurve aggregate_convergence(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate_convergence: no records");
  const std::size_t len = records[0].error_trace.size();
  for (const TrialRecord& r : records)
    if (r.error_trace.size() != len)
      throw std::invalid_argument("aggregate_convergence: unequal trace lengths");

  ConvergenceCurve curve;
  const std::size_t rows = len + 1;  // index 0 = initial error
  curve.mean_error.resize(rows);
  curve.rmse.resize(rows);
  curve.p10.resize(rows);
  curve.p50.resize(rows);
  curve.p90.resize(rows);

  std::vector<double> column(records.size());
  for (std::size_t it = 0; it < rows; ++it) {
    for (std::size_t t = 0; t < records.size(); ++t)
      column[t] = it == 0 ? records[t].initial_error : records[t].error_trace[it - 1];
    double sum = 0, sq = 0;
    for (const double v : column) {
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(column.size());
    curve.mean_error[it] = sum / n;
    curve.rmse[it] = std::sqrt(sq / n);
    std::sort(column.begin(), column.end());
    curve.p10[it] = percentile(column, 0.10);
    curve.p50[it] = percentile(column, 0.50);
    curve.p90[it] = percentile(column, 0.90);
  }
  return curve;
}

DetectionStats detection_stats(std::span<const TrialRecord> records) {
  DetectionStats st;
  for (const TrialRecord& rec : records) {
    const auto is_attacked = [&](int id) {
      return std::binary_search(rec.attacked_ids.begin(), rec.attacked_ids.end(), id);
    };
    for (const int id : rec.accepted_ids) {
      if (is_attacked(id)) {
        ++st.malicious_accepted;
        ++st.malicious_total;
      } else {
        ++st.benign_total;
      }
    }
    for (const int id : rec.rejected_ids) {
      if (is_attacked(id)) {
        ++st.malicious_total;
      } else {
        ++st.benign_rejected;
        ++st.benign_total;
      }
    }
  }
  if (st.benign_total > 0)
    st.r_fa = static_cast<double>(st.benign_rejected) / static_cast<double>(st.benign_total);
  if (st.malicious_total > 0)
    st.r_md = static_cast<double>(st.malicious_accepted) / static_cast<double>(st.malicious_total);
  return st;
}

RocCurve roc_sweep(const SimConfig& config, const ErrorSurface& surface,
                   std::span<const double> xi_grid, int threads) {
  if (xi_grid.empty()) throw std::invalid_argument("roc_sweep: empty xi grid");
  std::vector<double> grid(xi_grid.begin(), xi_grid.end());
  std::sort(grid.begin(), grid.end());
  for (const double xi : grid)
    if (!(xi > 0.0 && xi < 1.0))
      throw std::invalid_argument("roc_sweep: confidence values must lie in (0, 1)");

  RocCurve curve;
  for (const double xi : grid) {
    SimConfig c = config;
    c.estimator = EstimatorKind::kRdad;
    c.rdad.confidence = xi;
    const std::vector<TrialRecord> records = run_trials(c, surface, threads);
    RocPoint point;
    point.xi = xi;
    point.detection = detection_stats(records);
    double sum = 0;
    for (const TrialRecord& r : records) sum += r.final_error;
    point.mean_error = sum / static_cast<double>(records.size());
    curve.points.push_back(point);
  }
  return curve;
}

bool near_blind(const RocCurve& curve, double margin) {
  for (const RocPoint& p : curve.points) {
    if (!p.detection.r_fa || !p.detection.r_md) return false;
    if (1.0 - *p.detection.r_fa - *p.detection.r_md > margin) return false;
  }
  return !curve.points.empty();
}

}  // namespace mutpos
