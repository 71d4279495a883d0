#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mutpos/io.hpp"

namespace fs = std::filesystem;
using namespace mutpos;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", &tm);
  return buf;
}

struct CliState {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  int threads = 1;

  std::optional<std::string> estimator;
  std::optional<std::string> attack;
  std::optional<bool> coordinated;
  std::optional<int> trials;
  std::vector<double> xi_grid;
};

RunConfig resolve_config(const CliState& cli) {
  RunConfig cfg = cli.config_path.empty() ? default_config()
                                          : config_from_json(read_text_file(cli.config_path));
  if (cli.seed) cfg.sim.seed = *cli.seed;
  if (cli.trials) cfg.sim.trials = *cli.trials;
  if (cli.estimator) cfg.sim.estimator = estimator_from_name(*cli.estimator);
  if (cli.attack) {
    if (*cli.attack == "none") {
      cfg.sim.attack.reset();
    } else {
      const AttackMode mode = attack_mode_from_name(*cli.attack);
      AttackConfig atk = cfg.sim.attack.value_or(AttackConfig{});
      atk.mode = mode;
      const bool noise_family =
          mode == AttackMode::kDeterioration || mode == AttackMode::kVariance;
      if (noise_family && !std::holds_alternative<NoiseAttackVector>(atk.av))
        atk.av = NoiseAttackVector{50.0, 50.0};
      if (!noise_family && !std::holds_alternative<BiasAttackVector>(atk.av))
        atk.av = BiasAttackVector{5.0, 5.0};
      cfg.sim.attack = atk;
    }
  }
  if (cli.coordinated) {
    if (!cfg.sim.attack)
      throw ConfigError("--coordinated/--uncoordinated requires an attack to be configured");
    cfg.sim.attack->coordinated = *cli.coordinated;
  }
  cfg.sim.rdad.rgd = cfg.sim.rgd;
  return cfg;
}

ErrorSurface load_or_fit_surface(const RunConfig& cfg, bool quiet = false) {
  if (fs::exists(cfg.surface_cache)) return load_surface(cfg.surface_cache);
  if (!quiet)
    std::cerr << "surface cache '" << cfg.surface_cache << "' not found; fitting...\n";
  const ErrorSurface surface = fit_error_surface(cfg.fit_grid, cfg.fit_seed);
  save_surface(surface, cfg.surface_cache);
  return surface;
}

void write_run_outputs(const std::string& kind, const RunConfig& cfg,
                       const ErrorSurface& surface, const std::string& result_text,
                       const CliState& cli, const std::vector<double>& xi_grid,
                       fs::path outdir) {
  fs::create_directories(outdir);
  const std::string ext = cli.format == "json" ? ".json" : ".csv";
  const fs::path result_path = outdir / (kind == "roc" ? "roc" + ext : "curve" + ext);
  const fs::path manifest_path = outdir / "manifest.json";

  RunManifest m;
  m.kind = kind;
  m.created = utc_timestamp();
  m.threads = cli.threads;
  m.format = cli.format;
  m.config = cfg;
  m.xi_grid = xi_grid;
  m.surface_path = cfg.surface_cache;
  m.surface_seed = surface.seed;
  m.surface_r2_mu = surface.r2_mu;
  m.surface_r2_sigma = surface.r2_sigma;
  m.result_path = result_path.string();
  m.manifest_path = manifest_path.string();

  write_text_file(result_path.string(), result_text);
  write_text_file(manifest_path.string(), manifest_to_json(m));
  std::cout << "wrote " << result_path.string() << "\n";
  std::cout << "wrote " << manifest_path.string() << "\n";
}

int cmd_fit(const CliState& cli) {
  const RunConfig cfg = resolve_config(cli);
  const ErrorSurface surface = fit_error_surface(cfg.fit_grid, cfg.fit_seed);
  const std::string out = cli.out_path.empty() ? cfg.surface_cache : cli.out_path;
  save_surface(surface, out);
  std::cout << "wrote " << out << "\n";
  std::cout << "cells=" << cfg.fit_grid.d_values.size() * cfg.fit_grid.s_values.size()
            << " samples_per_cell=" << cfg.fit_grid.samples_per_cell
            << " r2_mu=" << format_double(surface.r2_mu)
            << " r2_sigma=" << format_double(surface.r2_sigma) << "\n";
  return 0;
}

int cmd_mc(const CliState& cli) {
  const RunConfig cfg = resolve_config(cli);
  const ErrorSurface surface = load_or_fit_surface(cfg);
  const std::vector<TrialRecord> records = run_trials(cfg.sim, surface, cli.threads);
  const ConvergenceCurve curve = aggregate_convergence(records);
  const std::string text =
      cli.format == "json" ? curve_to_json_text(curve) : curve_to_csv(curve);
  write_run_outputs("mc", cfg, surface, text, cli, {},
                    cli.out_path.empty() ? "out" : cli.out_path);
  std::cout << "trials=" << cfg.sim.trials
            << " estimator=" << estimator_name(cfg.sim.estimator)
            << " attack=" << (cfg.sim.attack ? attack_mode_name(cfg.sim.attack->mode) : "none")
            << " initial_mean_error=" << format_double(curve.mean_error.front())
            << " final_mean_error=" << format_double(curve.mean_error.back()) << "\n";
  return 0;
}

int cmd_roc(const CliState& cli) {
  const RunConfig cfg = resolve_config(cli);
  const std::vector<double> grid =
      cli.xi_grid.empty() ? std::vector<double>{0.5, 0.7, 0.9, 0.95, 0.99} : cli.xi_grid;
  const ErrorSurface surface = load_or_fit_surface(cfg);
  const RocCurve curve = roc_sweep(cfg.sim, surface, grid, cli.threads);
  const std::string text = cli.format == "json" ? roc_to_json_text(curve) : roc_to_csv(curve);
  write_run_outputs("roc", cfg, surface, text, cli, grid,
                    cli.out_path.empty() ? "out" : cli.out_path);

  double min_margin = 1.0;
  bool defined = true;
  for (const RocPoint& p : curve.points) {
    std::cout << "xi=" << format_double(p.xi);
    if (p.detection.r_fa) std::cout << " r_fa=" << format_double(*p.detection.r_fa);
    if (p.detection.r_md) std::cout << " r_md=" << format_double(*p.detection.r_md);
    std::cout << " mean_error=" << format_double(p.mean_error) << "\n";
    if (p.detection.r_fa && p.detection.r_md)
      min_margin = std::min(min_margin, 1.0 - *p.detection.r_fa - *p.detection.r_md);
    else
      defined = false;
  }
  if (!defined) {
    std::cout << "summary: detection rates undefined (no attack configured?)\n";
  } else if (near_blind(curve)) {
    std::cout << "summary: near-blind detection (all points within 0.15 of the "
                 "blind-guess line r_md = 1 - r_fa)\n";
  } else {
    std::cout << "summary: detector beats blind guess (min margin "
              << format_double(min_margin) << ")\n";
  }
  return 0;
}

int cmd_oracle(const CliState& cli, double distance, double sigma_p, std::uint64_t samples) {
  const RunConfig cfg = resolve_config(cli);
  RngStream rng = RngStream(cfg.sim.seed).stream("oracle");
  const DeltaStats st = delta_error_stats(distance, sigma_p * sigma_p, samples, rng);
  const ErrorSurface surface = load_or_fit_surface(cfg);
  std::cout << "d=" << format_double(distance) << " sigma_p=" << format_double(sigma_p)
            << " samples=" << samples << "\n";
  std::cout << "oracle : mean=" << format_double(st.mean)
            << " std=" << format_double(st.stddev) << "\n";
  std::cout << "surface: mu=" << format_double(surface.mu(distance, sigma_p))
            << " sigma_delta=" << format_double(surface.sigma_delta(distance, sigma_p)) << "\n";
  return 0;
}

int cmd_run(const CliState& cli, const std::string& manifest_path) {
  const RunManifest m = manifest_from_json(read_text_file(manifest_path));
  CliState replay;
  replay.threads = cli.threads > 1 ? cli.threads : m.threads;
  replay.format = m.format;
  replay.out_path = cli.out_path.empty() ? fs::path(m.result_path).parent_path().string()
                                         : cli.out_path;
  if (replay.out_path.empty()) replay.out_path = ".";

  const RunConfig& cfg = m.config;
  const ErrorSurface surface =
      fs::exists(m.surface_path) ? load_surface(m.surface_path)
                                 : fit_error_surface(cfg.fit_grid, cfg.fit_seed);

  std::string text;
  if (m.kind == "mc") {
    const std::vector<TrialRecord> records = run_trials(cfg.sim, surface, replay.threads);
    const ConvergenceCurve curve = aggregate_convergence(records);
    text = replay.format == "json" ? curve_to_json_text(curve) : curve_to_csv(curve);
  } else {
    const RocCurve curve = roc_sweep(cfg.sim, surface, m.xi_grid, replay.threads);
    text = replay.format == "json" ? roc_to_json_text(curve) : roc_to_csv(curve);
  }
  write_run_outputs(m.kind, cfg, surface, text, replay, m.xi_grid, replay.out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distance-based mutual positioning: simulation and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  CliState cli;
  app.add_option("--seed", cli.seed, "master seed (overrides config)");
  app.add_option("--config", cli.config_path, "JSON config file");
  app.add_option("--out", cli.out_path, "output path (fit: file, mc/roc: directory)");
  app.add_option("--format", cli.format, "result format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", cli.threads, "worker threads for trials")
      ->check(CLI::PositiveNumber);

  CLI::App* fit = app.add_subcommand("fit", "fit the error-conversion surfaces");

  const auto add_mc_flags = [&](CLI::App* sub) {
    sub->add_option_function<std::string>(
           "--estimator", [&](const std::string& v) { cli.estimator = v; },
           "lse | rgd | rdad")
        ->check(CLI::IsMember({"lse", "rgd", "rdad"}));
    sub->add_option_function<std::string>(
           "--attack", [&](const std::string& v) { cli.attack = v; },
           "none | deterioration | variance | bias | manipulation")
        ->check(CLI::IsMember({"none", "deterioration", "variance", "bias", "manipulation"}));
    sub->add_flag_function(
        "--coordinated", [&](std::int64_t) { cli.coordinated = true; },
        "all compromised UAVs attack in the same rounds");
    sub->add_flag_function(
        "--uncoordinated", [&](std::int64_t) { cli.coordinated = false; },
        "independent per-UAV penetration draws");
    sub->add_option_function<int>(
           "--trials", [&](int v) { cli.trials = v; }, "Monte-Carlo trials")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* mc = app.add_subcommand("mc", "Monte-Carlo convergence run");
  add_mc_flags(mc);
  CLI::App* roc = app.add_subcommand("roc", "sweep the confidence threshold, emit ROC");
  add_mc_flags(roc);
  roc->add_option("--xi-grid", cli.xi_grid, "comma-separated confidence thresholds in (0,1)")
      ->delimiter(',');

  CLI::App* oracle = app.add_subcommand("oracle", "print brute-force error stats vs surface");
  double oracle_d = 10.0, oracle_sp = 1.0;
  std::uint64_t oracle_n = 1000000;
  oracle->add_option("--distance", oracle_d, "true distance, m")->required();
  oracle->add_option("--sigma-p", oracle_sp, "position-error sigma, m")
      ->required()
      ->check(CLI::NonNegativeNumber);
  oracle->add_option("--samples", oracle_n, "sample count")->check(CLI::PositiveNumber);

  CLI::App* run = app.add_subcommand("run", "replay a run from its manifest");
  std::string manifest_path;
  run->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) return cmd_fit(cli);
    if (*mc) return cmd_mc(cli);
    if (*roc) return cmd_roc(cli);
    if (*oracle) return cmd_oracle(cli, oracle_d, oracle_sp, oracle_n);
    if (*run) return cmd_run(cli, manifest_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
