#include "bandit/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bandit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_u64(const json& obj, const std::string& path, const char* key,
                      std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(path + "." + key, "expected an integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    fail(path + "." + key, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

const std::set<std::string> kHyperKeys = {
    "b",           "delta",          "lambda",          "oful_confidence",
    "subgaussian_r", "theta_bound",  "radius_override", "linucb_alpha",
    "ts_v",        "identity_resample"};

Hyperparams parse_hyper(const json& obj, const std::string& path,
                        const Hyperparams& base, bool allow_per_noise_key) {
  std::set<std::string> allowed = kHyperKeys;
  allowed.insert("kind");
  if (allow_per_noise_key) allowed.insert("per_noise");
  check_keys(obj, path, allowed);
  Hyperparams hp = base;
  hp.b = static_cast<std::size_t>(
      get_u64(obj, path, "b", static_cast<std::uint64_t>(base.b)));
  hp.delta = get_number(obj, path, "delta", base.delta);
  hp.lambda = get_number(obj, path, "lambda", base.lambda);
  hp.oful_confidence = get_number(obj, path, "oful_confidence", base.oful_confidence);
  hp.subgaussian_r = get_number(obj, path, "subgaussian_r", base.subgaussian_r);
  hp.theta_bound = get_number(obj, path, "theta_bound", base.theta_bound);
  hp.radius_override = get_number(obj, path, "radius_override", base.radius_override);
  hp.linucb_alpha = get_number(obj, path, "linucb_alpha", base.linucb_alpha);
  hp.ts_v = get_number(obj, path, "ts_v", base.ts_v);
  hp.identity_resample =
      get_bool(obj, path, "identity_resample", base.identity_resample);
  return hp;
}

json hyper_to_json(const Hyperparams& hp) {
  json j;
  j["b"] = hp.b;
  j["delta"] = hp.delta;
  j["lambda"] = hp.lambda;
  j["oful_confidence"] = hp.oful_confidence;
  j["subgaussian_r"] = hp.subgaussian_r;
  j["theta_bound"] = hp.theta_bound;
  j["radius_override"] = hp.radius_override;
  j["linucb_alpha"] = hp.linucb_alpha;
  j["ts_v"] = hp.ts_v;
  j["identity_resample"] = hp.identity_resample;
  return j;
}

}  // namespace

FullConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  check_keys(root, origin, {"experiment", "hpm", "agents", "output"});

  FullConfig cfg;
  ExperimentConfig& ex = cfg.experiment;

  if (root.contains("experiment")) {
    const json& e = root.at("experiment");
    const std::string path = origin + ".experiment";
    check_keys(e, path,
               {"k", "design_runs", "n_surfaces", "horizon", "report_horizons",
                "noise", "root_seed", "threads", "tune_surfaces",
                "tune_surface_offset"});
    ex.k = static_cast<std::size_t>(get_u64(e, path, "k", ex.k));
    ex.design_runs =
        static_cast<std::size_t>(get_u64(e, path, "design_runs", ex.design_runs));
    ex.n_surfaces =
        static_cast<std::size_t>(get_u64(e, path, "n_surfaces", ex.n_surfaces));
    ex.horizon = static_cast<std::size_t>(get_u64(e, path, "horizon", ex.horizon));
    if (e.contains("report_horizons")) {
      const json& h = e.at("report_horizons");
      if (!h.is_array()) fail(path + ".report_horizons", "expected an array");
      ex.report_horizons.clear();
      for (const json& v : h) {
        if (!v.is_number_unsigned() && !v.is_number_integer())
          fail(path + ".report_horizons", "expected integers");
        ex.report_horizons.push_back(v.get<std::size_t>());
      }
    }
    if (e.contains("noise")) {
      const json& n = e.at("noise");
      const std::string npath = path + ".noise";
      check_keys(n, npath, {"kind", "sigmas"});
      if (n.contains("kind")) {
        const std::string kind = n.at("kind").get<std::string>();
        if (kind == "laplace")
          ex.noise_kind = NoiseKind::laplace;
        else if (kind == "gaussian")
          ex.noise_kind = NoiseKind::gaussian;
        else
          fail(npath + ".kind", "expected \"laplace\" or \"gaussian\"");
      }
      if (n.contains("sigmas")) {
        const json& s = n.at("sigmas");
        if (!s.is_array() || s.empty())
          fail(npath + ".sigmas", "expected a nonempty array");
        ex.noise_sigmas.clear();
        for (const json& v : s) {
          if (!v.is_number()) fail(npath + ".sigmas", "expected numbers");
          ex.noise_sigmas.push_back(v.get<double>());
        }
      }
    }
    ex.root_seed = get_u64(e, path, "root_seed", ex.root_seed);
    ex.threads = static_cast<unsigned>(get_u64(e, path, "threads", ex.threads));
    ex.tune_surfaces = static_cast<std::size_t>(
        get_u64(e, path, "tune_surfaces", ex.tune_surfaces));
    ex.tune_surface_offset =
        get_u64(e, path, "tune_surface_offset", ex.tune_surface_offset);
  }

  if (root.contains("hpm")) {
    const json& h = root.at("hpm");
    const std::string path = origin + ".hpm";
    check_keys(h, path,
               {"p_main_active", "sigma_main", "hierarchy_r2", "hierarchy_r3",
                "heredity_2way", "heredity_3way", "sigma_intercept",
                "inactive_sigma", "min_optimum", "max_sample_attempts"});
    HpmConfig& m = ex.hpm;
    m.p_main_active = get_number(h, path, "p_main_active", m.p_main_active);
    m.sigma_main = get_number(h, path, "sigma_main", m.sigma_main);
    m.r2 = get_number(h, path, "hierarchy_r2", m.r2);
    m.r3 = get_number(h, path, "hierarchy_r3", m.r3);
    if (h.contains("heredity_2way")) {
      const json& a = h.at("heredity_2way");
      if (!a.is_array() || a.size() != 3)
        fail(path + ".heredity_2way", "expected an array of 3 probabilities");
      for (std::size_t i = 0; i < 3; ++i) m.heredity_2way[i] = a[i].get<double>();
    }
    if (h.contains("heredity_3way")) {
      const json& a = h.at("heredity_3way");
      if (!a.is_array() || a.size() != 4)
        fail(path + ".heredity_3way", "expected an array of 4 probabilities");
      for (std::size_t i = 0; i < 4; ++i) m.heredity_3way[i] = a[i].get<double>();
    }
    m.sigma_intercept = get_number(h, path, "sigma_intercept", m.sigma_intercept);
    m.inactive_sigma = get_number(h, path, "inactive_sigma", m.inactive_sigma);
    m.min_optimum = get_number(h, path, "min_optimum", m.min_optimum);
    m.max_sample_attempts = static_cast<std::size_t>(get_u64(
        h, path, "max_sample_attempts",
        static_cast<std::uint64_t>(m.max_sample_attempts)));
  }

  if (root.contains("agents")) {
    const json& a = root.at("agents");
    if (!a.is_array() || a.empty())
      fail(origin + ".agents", "expected a nonempty array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string path = origin + ".agents[" + std::to_string(i) + "]";
      const json& entry = a[i];
      if (!entry.is_object() || !entry.contains("kind"))
        fail(path, "expected an object with a \"kind\" key");
      const std::string kind_name = entry.at("kind").get<std::string>();
      const auto kind = agent_kind_from(kind_name);
      if (!kind) fail(path + ".kind", "unknown agent kind \"" + kind_name + "\"");
      AgentSpec spec;
      spec.kind = *kind;
      spec.base = parse_hyper(entry, path, Hyperparams{}, true);
      if (entry.contains("per_noise")) {
        const json& pn = entry.at("per_noise");
        if (!pn.is_object()) fail(path + ".per_noise", "expected an object");
        for (const auto& [key, value] : pn.items()) {
          double sigma = 0.0;
          try {
            sigma = std::stod(key);
          } catch (...) {
            fail(path + ".per_noise", "key \"" + key + "\" is not a number");
          }
          spec.per_noise[sigma] =
              parse_hyper(value, path + ".per_noise." + key, spec.base, false);
        }
      }
      ex.agents.push_back(std::move(spec));
    }
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    check_keys(o, origin + ".output", {"dir"});
    if (o.contains("dir")) cfg.output.dir = o.at("dir").get<std::string>();
  }

  try {
    ex.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

FullConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

std::string effective_config_text(const FullConfig& cfg) {
  const ExperimentConfig& ex = cfg.experiment;
  json root;
  json e;
  e["k"] = ex.k;
  e["design_runs"] = ex.design_runs;
  e["n_surfaces"] = ex.n_surfaces;
  e["horizon"] = ex.horizon;
  e["report_horizons"] = ex.report_horizons;
  e["noise"] = {
      {"kind", ex.noise_kind == NoiseKind::laplace ? "laplace" : "gaussian"},
      {"sigmas", ex.noise_sigmas}};
  e["root_seed"] = ex.root_seed;
  e["threads"] = ex.threads;
  e["tune_surfaces"] = ex.tune_surfaces;
  e["tune_surface_offset"] = ex.tune_surface_offset;
  root["experiment"] = std::move(e);

  const HpmConfig& m = ex.hpm;
  json h;
  h["p_main_active"] = m.p_main_active;
  h["sigma_main"] = m.sigma_main;
  h["hierarchy_r2"] = m.r2;
  h["hierarchy_r3"] = m.r3;
  h["heredity_2way"] = m.heredity_2way;
  h["heredity_3way"] = m.heredity_3way;
  h["sigma_intercept"] = m.sigma_intercept;
  h["inactive_sigma"] = m.inactive_sigma;
  h["min_optimum"] = m.min_optimum;
  h["max_sample_attempts"] = m.max_sample_attempts;
  root["hpm"] = std::move(h);

  json agents = json::array();
  for (const AgentSpec& spec : ex.agents) {
    json entry = hyper_to_json(spec.base);
    entry["kind"] = std::string(to_string(spec.kind));
    if (!spec.per_noise.empty()) {
      json pn;
      for (const auto& [sigma, hp] : spec.per_noise)
        pn[format_double(sigma)] = hyper_to_json(hp);
      entry["per_noise"] = std::move(pn);
    }
    agents.push_back(std::move(entry));
  }
  root["agents"] = std::move(agents);
  root["output"] = {{"dir", cfg.output.dir}};
  return root.dump(2) + "\n";
}

TuneGrid parse_grid_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root.is_object() || root.empty())
    throw ConfigError(origin + ": expected a nonempty object of agent grids");
  TuneGrid grid;
  Hyperparams probe;
  for (const auto& [agent_name, params] : root.items()) {
    const auto kind = agent_kind_from(agent_name);
    if (!kind) fail(origin, "unknown agent kind \"" + agent_name + "\"");
    if (!params.is_object())
      fail(origin + "." + agent_name, "expected an object of parameter lists");
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    for (const auto& [pname, values] : params.items()) {
      if (!set_hyperparam(probe, pname, 1.0))
        fail(origin + "." + agent_name + "." + pname,
             "unknown hyperparameter name");
      if (!values.is_array() || values.empty())
        fail(origin + "." + agent_name + "." + pname,
             "expected a nonempty array of values");
      std::vector<double> list;
      for (const json& v : values) {
        if (!v.is_number())
          fail(origin + "." + agent_name + "." + pname, "expected numbers");
        list.push_back(v.get<double>());
      }
      axes.emplace_back(pname, std::move(list));
    }
    if (axes.empty())
      fail(origin + "." + agent_name, "expected at least one parameter list");
    grid.params[*kind] = std::move(axes);
  }
  return grid;
}

TuneGrid parse_grid_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read grid file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid_text(buf.str(), path.string());
}

void apply_tune_choices(FullConfig& cfg, const TuneResult& result) {
  for (const TuneResult::Choice& choice : result.choices) {
    for (AgentSpec& spec : cfg.experiment.agents) {
      if (spec.kind != choice.kind) continue;
      spec.per_noise[choice.sigma] = choice.hp;
    }
  }
}

}  // namespace bandit
