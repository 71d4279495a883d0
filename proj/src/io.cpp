#include "mutpos/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mutpos {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

void require_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) fail(path + "/" + key, "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(path + "/" + key, "expected a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(path + "/" + key, "expected an integer");
  return obj[key].get<int>();
}

std::array<double, 2> get_range(const json& obj, const std::string& path, const char* key,
                                std::array<double, 2> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(path + "/" + key, "expected [lo, hi]");
  std::array<double, 2> out{v[0].get<double>(), v[1].get<double>()};
  if (out[0] > out[1]) fail(path + "/" + key, "lo must not exceed hi");
  return out;
}

}  // namespace

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kLse: return "lse";
    case EstimatorKind::kRgd: return "rgd";
    case EstimatorKind::kRdad: return "rdad";
  }
  return "rgd";
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "lse") return EstimatorKind::kLse;
  if (name == "rgd") return EstimatorKind::kRgd;
  if (name == "rdad") return EstimatorKind::kRdad;
  throw ConfigError("unknown estimator '" + name + "' (expected lse|rgd|rdad)");
}

std::string attack_mode_name(AttackMode mode) {
  switch (mode) {
    case AttackMode::kDeterioration: return "deterioration";
    case AttackMode::kVariance: return "variance";
    case AttackMode::kBias: return "bias";
    case AttackMode::kManipulation: return "manipulation";
  }
  return "manipulation";
}

AttackMode attack_mode_from_name(const std::string& name) {
  if (name == "deterioration") return AttackMode::kDeterioration;
  if (name == "variance") return AttackMode::kVariance;
  if (name == "bias") return AttackMode::kBias;
  if (name == "manipulation") return AttackMode::kManipulation;
  throw ConfigError("unknown attack mode '" + name +
                    "' (expected deterioration|variance|bias|manipulation)");
}

RunConfig default_config() {
  RunConfig c;
  c.fit_grid = default_fit_grid();
  return c;
}

namespace {

AttackConfig parse_attack(const json& obj, const std::string& path) {
  require_keys(obj, path, {"mode", "av", "num_compromised", "penetration", "coordinated"});
  AttackConfig atk;
  if (!obj.contains("mode") || !obj["mode"].is_string()) fail(path + "/mode", "required string");
  atk.mode = attack_mode_from_name(obj["mode"].get<std::string>());

  const bool noise_family =
      atk.mode == AttackMode::kDeterioration || atk.mode == AttackMode::kVariance;
  std::array<double, 2> av = noise_family ? std::array<double, 2>{50.0, 50.0}
                                          : std::array<double, 2>{5.0, 5.0};
  if (obj.contains("av")) {
    const json& v = obj["av"];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(path + "/av", "expected [a, b]");
    av = {v[0].get<double>(), v[1].get<double>()};
  }
  if (noise_family) {
    if (av[0] < 0 || av[1] < 0) fail(path + "/av", "noise variances must be >= 0");
    atk.av = NoiseAttackVector{av[0], av[1]};
  } else {
    atk.av = BiasAttackVector{av[0], av[1]};
  }

  atk.num_compromised = get_int(obj, path, "num_compromised", 3);
  if (atk.num_compromised < 0) fail(path + "/num_compromised", "must be >= 0");
  atk.penetration = get_number(obj, path, "penetration", 0.5);
  if (atk.penetration < 0.0 || atk.penetration > 1.0)
    fail(path + "/penetration", "must lie in [0, 1]");
  if (obj.contains("coordinated")) {
    if (!obj["coordinated"].is_boolean()) fail(path + "/coordinated", "expected a boolean");
    atk.coordinated = obj["coordinated"].get<bool>();
  }
  return atk;
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config error: top level must be an object");

  RunConfig c = default_config();
  require_keys(root, "", {"map_size", "num_uavs", "sigma_p_sq_range", "sigma_d_sq_range",
                          "trials", "seed", "estimator", "attack", "rgd", "rdad", "fit",
                          "surface_cache"});

  c.sim.map_size = get_number(root, "", "map_size", c.sim.map_size);
  if (c.sim.map_size <= 0) fail("/map_size", "must be > 0");
  c.sim.num_uavs = get_int(root, "", "num_uavs", c.sim.num_uavs);
  if (c.sim.num_uavs < 1) fail("/num_uavs", "must be >= 1");
  c.sim.sigma_p_sq_range = get_range(root, "", "sigma_p_sq_range", c.sim.sigma_p_sq_range);
  if (c.sim.sigma_p_sq_range[0] < 0) fail("/sigma_p_sq_range", "variances must be >= 0");
  c.sim.sigma_d_sq_range = get_range(root, "", "sigma_d_sq_range", c.sim.sigma_d_sq_range);
  if (c.sim.sigma_d_sq_range[0] < 0) fail("/sigma_d_sq_range", "variances must be >= 0");
  c.sim.trials = get_int(root, "", "trials", c.sim.trials);
  if (c.sim.trials < 1) fail("/trials", "must be >= 1");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) fail("/seed", "expected a nonnegative integer");
    c.sim.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("estimator")) {
    if (!root["estimator"].is_string()) fail("/estimator", "expected a string");
    c.sim.estimator = estimator_from_name(root["estimator"].get<std::string>());
  }
  if (root.contains("attack") && !root["attack"].is_null())
    c.sim.attack = parse_attack(root["attack"], "/attack");

  if (root.contains("rgd")) {
    const json& r = root["rgd"];
    if (!r.is_object()) fail("/rgd", "expected an object");
    require_keys(r, "/rgd", {"epsilon", "max_iters", "alpha", "gamma", "momentum"});
    c.sim.rgd.epsilon = get_number(r, "/rgd", "epsilon", c.sim.rgd.epsilon);
    if (c.sim.rgd.epsilon <= 0) fail("/rgd/epsilon", "must be > 0");
    c.sim.rgd.max_iters = get_int(r, "/rgd", "max_iters", c.sim.rgd.max_iters);
    if (c.sim.rgd.max_iters < 1) fail("/rgd/max_iters", "must be >= 1");
    c.sim.rgd.alpha = get_number(r, "/rgd", "alpha", c.sim.rgd.alpha);
    if (c.sim.rgd.alpha <= 0) fail("/rgd/alpha", "must be > 0");
    c.sim.rgd.gamma = get_number(r, "/rgd", "gamma", c.sim.rgd.gamma);
    if (c.sim.rgd.gamma <= 0 || c.sim.rgd.gamma >= 1) fail("/rgd/gamma", "must lie in (0, 1)");
    c.sim.rgd.momentum = get_number(r, "/rgd", "momentum", c.sim.rgd.momentum);
    if (c.sim.rgd.momentum < 0) fail("/rgd/momentum", "must be >= 0");
  }

  if (root.contains("rdad")) {
    const json& r = root["rdad"];
    if (!r.is_object()) fail("/rdad", "expected an object");
    require_keys(r, "/rdad", {"confidence", "upper_iters", "lower_iters", "sigma_min"});
    c.sim.rdad.confidence = get_number(r, "/rdad", "confidence", c.sim.rdad.confidence);
    if (c.sim.rdad.confidence <= 0 || c.sim.rdad.confidence >= 1)
      fail("/rdad/confidence", "must lie in (0, 1)");
    c.sim.rdad.upper_iters = get_int(r, "/rdad", "upper_iters", c.sim.rdad.upper_iters);
    if (c.sim.rdad.upper_iters < 1) fail("/rdad/upper_iters", "must be >= 1");
    c.sim.rdad.lower_iters = get_int(r, "/rdad", "lower_iters", c.sim.rdad.lower_iters);
    if (c.sim.rdad.lower_iters < 1) fail("/rdad/lower_iters", "must be >= 1");
    c.sim.rdad.sigma_min = get_number(r, "/rdad", "sigma_min", c.sim.rdad.sigma_min);
    if (c.sim.rdad.sigma_min <= 0) fail("/rdad/sigma_min", "must be > 0");
  }
  c.sim.rdad.rgd = c.sim.rgd;

  if (root.contains("fit")) {
    const json& f = root["fit"];
    if (!f.is_object()) fail("/fit", "expected an object");
    require_keys(f, "/fit", {"d_grid", "s_grid", "samples_per_cell", "seed"});
    if (f.contains("d_grid")) {
      if (!f["d_grid"].is_array()) fail("/fit/d_grid", "expected an array");
      c.fit_grid.d_values = f["d_grid"].get<std::vector<double>>();
    }
    if (f.contains("s_grid")) {
      if (!f["s_grid"].is_array()) fail("/fit/s_grid", "expected an array");
      c.fit_grid.s_values = f["s_grid"].get<std::vector<double>>();
    }
    c.fit_grid.samples_per_cell =
        get_int(f, "/fit", "samples_per_cell", c.fit_grid.samples_per_cell);
    if (c.fit_grid.samples_per_cell < 100) fail("/fit/samples_per_cell", "must be >= 100");
    if (f.contains("seed")) {
      if (!f["seed"].is_number_unsigned()) fail("/fit/seed", "expected a nonnegative integer");
      c.fit_seed = f["seed"].get<std::uint64_t>();
    }
  }

  if (root.contains("surface_cache")) {
    if (!root["surface_cache"].is_string()) fail("/surface_cache", "expected a string");
    c.surface_cache = root["surface_cache"].get<std::string>();
  }
  return c;
}

namespace {

json attack_to_json(const AttackConfig& atk) {
  json j;
  j["mode"] = attack_mode_name(atk.mode);
  if (const auto* n = std::get_if<NoiseAttackVector>(&atk.av))
    j["av"] = {n->sigma_p_sq_delta, n->sigma_d_sq_delta};
  else if (const auto* b = std::get_if<BiasAttackVector>(&atk.av))
    j["av"] = {b->nu_x, b->nu_y};
  j["num_compromised"] = atk.num_compromised;
  j["penetration"] = atk.penetration;
  j["coordinated"] = atk.coordinated;
  return j;
}

json config_to_json_obj(const RunConfig& c) {
  json j;
  j["map_size"] = c.sim.map_size;
  j["num_uavs"] = c.sim.num_uavs;
  j["sigma_p_sq_range"] = c.sim.sigma_p_sq_range;
  j["sigma_d_sq_range"] = c.sim.sigma_d_sq_range;
  j["trials"] = c.sim.trials;
  j["seed"] = c.sim.seed;
  j["estimator"] = estimator_name(c.sim.estimator);
  j["attack"] = c.sim.attack ? attack_to_json(*c.sim.attack) : json(nullptr);
  j["rgd"] = {{"epsilon", c.sim.rgd.epsilon},
              {"max_iters", c.sim.rgd.max_iters},
              {"alpha", c.sim.rgd.alpha},
              {"gamma", c.sim.rgd.gamma},
              {"momentum", c.sim.rgd.momentum}};
  j["rdad"] = {{"confidence", c.sim.rdad.confidence},
               {"upper_iters", c.sim.rdad.upper_iters},
               {"lower_iters", c.sim.rdad.lower_iters},
               {"sigma_min", c.sim.rdad.sigma_min}};
  j["fit"] = {{"d_grid", c.fit_grid.d_values},
              {"s_grid", c.fit_grid.s_values},
              {"samples_per_cell", c.fit_grid.samples_per_cell},
              {"seed", c.fit_seed}};
  j["surface_cache"] = c.surface_cache;
  return j;
}

}  // namespace

std::string config_to_json(const RunConfig& config) {
  return config_to_json_obj(config).dump(2) + "\n";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string curve_to_csv(const ConvergenceCurve& curve) {
  std::string out = "iteration,mean_error,rmse,p10,p50,p90\n";
  for (std::size_t i = 0; i < curve.mean_error.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(curve.mean_error[i]);
    out += ',';
    out += format_double(curve.rmse[i]);
    out += ',';
    out += format_double(curve.p10[i]);
    out += ',';
    out += format_double(curve.p50[i]);
    out += ',';
    out += format_double(curve.p90[i]);
    out += '\n';
  }
  return out;
}

std::string curve_to_json_text(const ConvergenceCurve& curve) {
  json rows = json::array();
  for (std::size_t i = 0; i < curve.mean_error.size(); ++i) {
    rows.push_back({{"iteration", i},
                    {"mean_error", curve.mean_error[i]},
                    {"rmse", curve.rmse[i]},
                    {"p10", curve.p10[i]},
                    {"p50", curve.p50[i]},
                    {"p90", curve.p90[i]}});
  }
  return rows.dump(2) + "\n";
}

namespace {

std::string rate_or_nan(const std::optional<double>& r) {
  return r ? format_double(*r) : "nan";
}

}  // namespace

std::string roc_to_csv(const RocCurve& curve) {
  std::string out = "xi,r_fa,r_md,mean_error\n";
  for (const RocPoint& p : curve.points) {
    out += format_double(p.xi);
    out += ',';
    out += rate_or_nan(p.detection.r_fa);
    out += ',';
    out += rate_or_nan(p.detection.r_md);
    out += ',';
    out += format_double(p.mean_error);
    out += '\n';
  }
  return out;
}

std::string roc_to_json_text(const RocCurve& curve) {
  json rows = json::array();
  for (const RocPoint& p : curve.points) {
    json row;
    row["xi"] = p.xi;
    if (p.detection.r_fa) row["r_fa"] = *p.detection.r_fa; else row["r_fa"] = nullptr;
    if (p.detection.r_md) row["r_md"] = *p.detection.r_md; else row["r_md"] = nullptr;
    row["mean_error"] = p.mean_error;
    rows.push_back(row);
  }
  return rows.dump(2) + "\n";
}

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["kind"] = m.kind;
  j["version"] = kToolVersion;
  j["created"] = m.created;
  j["threads"] = m.threads;
  j["format"] = m.format;
  j["config"] = config_to_json_obj(m.config);
  if (m.kind == "roc") j["xi_grid"] = m.xi_grid;
  j["surface"] = {{"path", m.surface_path},
                  {"seed", m.surface_seed},
                  {"r2_mu", m.surface_r2_mu},
                  {"r2_sigma", m.surface_r2_sigma}};
  j["outputs"] = {{"result", m.result_path}, {"manifest", m.manifest_path}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest parse error: ") + e.what());
  }
  RunManifest m;
  m.kind = j.at("kind").get<std::string>();
  if (m.kind != "mc" && m.kind != "roc")
    throw ConfigError("manifest error: kind must be mc or roc");
  m.created = j.value("created", "");
  m.threads = j.value("threads", 1);
  m.format = j.value("format", "csv");
  m.config = config_from_json(j.at("config").dump());
  if (j.contains("xi_grid")) m.xi_grid = j["xi_grid"].get<std::vector<double>>();
  const json& s = j.at("surface");
  m.surface_path = s.at("path").get<std::string>();
  m.surface_seed = s.at("seed").get<std::uint64_t>();
  m.surface_r2_mu = s.value("r2_mu", 0.0);
  m.surface_r2_sigma = s.value("r2_sigma", 0.0);
  m.result_path = j.at("outputs").at("result").get<std::string>();
  m.manifest_path = j.at("outputs").at("manifest").get<std::string>();
  return m;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << content;
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace mutpos
