#pragma once

// Experiment orchestration: config schema, deterministic replication loop,
// and result emission (metrics.csv, summary.json, selection/p-value dumps).

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "confsel/baselines.hpp"
#include "confsel/core.hpp"
#include "confsel/csv.hpp"
#include "confsel/metrics.hpp"
#include "confsel/predictor.hpp"
#include "confsel/pvalue.hpp"
#include "confsel/rng.hpp"
#include "confsel/score.hpp"
#include "confsel/select.hpp"
#include "confsel/simgen.hpp"

namespace confsel::experiment {

inline constexpr const char* kVersion = "confsel 0.1.0";

// Exit-code contract: 0 success, 2 config error, 3 data error.
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { select, simulate, replicate, sweep };
enum class Method { mccs, mrcs, baseline_int, baseline_uni, baseline_int_b, baseline_uni_b, ind };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::select: return "select";
    case Mode::simulate: return "simulate";
    case Mode::replicate: return "replicate";
    case Mode::sweep: return "sweep";
  }
  return "?";
}

inline const char* method_name(Method m) {
  switch (m) {
    case Method::mccs: return "mccs";
    case Method::mrcs: return "mrcs";
    case Method::baseline_int: return "int";
    case Method::baseline_uni: return "uni";
    case Method::baseline_int_b: return "int_b";
    case Method::baseline_uni_b: return "uni_b";
    case Method::ind: return "ind";
  }
  return "?";
}

inline Method parse_method(std::string name) {
  for (auto& ch : name) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == '-') ch = '_';
  }
  if (name == "mccs") return Method::mccs;
  if (name == "mrcs") return Method::mrcs;
  if (name == "int") return Method::baseline_int;
  if (name == "uni") return Method::baseline_uni;
  if (name == "int_b") return Method::baseline_int_b;
  if (name == "uni_b") return Method::baseline_uni_b;
  if (name == "ind") return Method::ind;
  throw ConfigError("unknown method '" + name + "'");
}

// ===== config schema =====

struct IntervalSpec {
  std::optional<double> lo;
  std::optional<double> hi;
};

struct DataConfig {
  std::string kind = "univariate";  // univariate | multivariate
  int setting = 1;
  int n = 1000;
  int p = 10;
  double noise_level = 0.5;
  int d_x = 5;  // multivariate feature dimension
  int d_y = 10; // multivariate response dimension
  double sigma = 0.5;
  double rho = 0.5;
};

struct InputConfig {
  std::string train;
  std::string cal;
  std::string test;
  std::string cal_predictions;
  std::string test_predictions;
};

struct TargetConfig {
  std::string kind = "conjunctive";
  // conjunctive | disjunctive | task | intervals | shell | multisphere | centroid_ball
  double lo = 0.0, hi = 0.0;          // quantile masses; kind-specific defaults
  bool lo_set = false, hi_set = false;
  int task = 5;
  std::vector<double> knots;          // task quantile knots (pattern defaults when empty)
  std::vector<IntervalSpec> intervals;  // absolute endpoints, select mode
  double base_radius = 0.0;           // shell / multisphere
  int num_spheres = 2;
  double radius = 0.0;                // centroid_ball
};

struct PredictorConfig {
  std::string kind = "ridge";  // ridge | kernel_ridge
  double lambda = 1e-3;
  double gamma = 0.0;          // 0 = median-style heuristic
};

struct ScoreConfig {
  std::string test_branch = "inside";  // inside | outside
  bool drop_pred_term = false;
  bool exclude_outside_cal = false;
  bool shared_u = false;
};

struct ExperimentConfig {
  Mode mode = Mode::replicate;
  std::uint64_t seed = 1;
  int replications = 1;
  int workers = 1;
  std::vector<double> q_values;
  std::vector<Method> methods{Method::mccs};
  std::string output_dir = ".";
  bool dump_pvalues = false;
  bool dump_selection = false;
  DataConfig data;
  InputConfig input;
  TargetConfig target;
  PredictorConfig predictor;
  ScoreConfig score;
  std::string digest;  // filled by parse_config
};

namespace detail {

// Seed-derivation tags separating the independent random ingredients.
inline constexpr std::uint64_t kDataTag = 0xD4;
inline constexpr std::uint64_t kSplitTag = 0x59;
inline constexpr std::uint64_t kRegionTag = 0x4E;

inline void check_keys(const nlohmann::json& j, const char* context,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(context) + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + context);
  }
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key, const char* context, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key '") + key + "' in " + context + " has the wrong type");
  }
}

inline std::uint64_t fnv1a_string(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline bool is_region_kind(const std::string& kind) {
  return kind == "shell" || kind == "multisphere" || kind == "centroid_ball";
}

}  // namespace detail

// Fully materialized config (defaults included) with sorted keys; the digest
// hashes this dump so equivalent configs collide and different ones do not.
// Plumbing knobs (workers, output paths, dump flags) stay outside the digest:
// by contract they cannot change the numbers.
inline nlohmann::json canonical_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["mode"] = mode_name(c.mode);
  j["seed"] = c.seed;
  j["replications"] = c.replications;
  j["q"] = c.q_values;
  {
    std::vector<std::string> names;
    for (const Method m : c.methods) names.emplace_back(method_name(m));
    j["methods"] = names;
  }
  j["data"] = {{"kind", c.data.kind},   {"setting", c.data.setting}, {"n", c.data.n},
               {"p", c.data.p},         {"noise_level", c.data.noise_level},
               {"d_x", c.data.d_x},     {"d_y", c.data.d_y},         {"sigma", c.data.sigma},
               {"rho", c.data.rho}};
  j["input"] = {{"train", c.input.train},
                {"cal", c.input.cal},
                {"test", c.input.test},
                {"cal_predictions", c.input.cal_predictions},
                {"test_predictions", c.input.test_predictions}};
  nlohmann::json ivs = nlohmann::json::array();
  for (const auto& iv : c.target.intervals) {
    nlohmann::json one;
    if (iv.lo) one["lo"] = *iv.lo;
    if (iv.hi) one["hi"] = *iv.hi;
    ivs.push_back(one);
  }
  j["target"] = {{"kind", c.target.kind},
                 {"lo", c.target.lo},
                 {"hi", c.target.hi},
                 {"task", c.target.task},
                 {"knots", c.target.knots},
                 {"intervals", ivs},
                 {"base_radius", c.target.base_radius},
                 {"num_spheres", c.target.num_spheres},
                 {"radius", c.target.radius}};
  j["predictor"] = {{"kind", c.predictor.kind},
                    {"lambda", c.predictor.lambda},
                    {"gamma", c.predictor.gamma}};
  j["score"] = {{"test_branch", c.score.test_branch},
                {"drop_pred_term", c.score.drop_pred_term},
                {"exclude_outside_cal", c.score.exclude_outside_cal},
                {"shared_u", c.score.shared_u}};
  return j;
}

inline std::string config_digest(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "fnv1a:" << std::hex << std::setw(16) << std::setfill('0')
      << detail::fnv1a_string(canonical_json(c).dump());
  return out.str();
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::get_field;

  check_keys(j, "config",
             {"mode", "seed", "replications", "workers", "q", "q_grid", "methods", "output_dir",
              "dump_pvalues", "dump_selection", "data", "input", "target", "predictor", "score"});

  ExperimentConfig c;
  const auto mode_str = get_field<std::string>(j, "mode", "config", "replicate");
  if (mode_str == "select")
    c.mode = Mode::select;
  else if (mode_str == "simulate")
    c.mode = Mode::simulate;
  else if (mode_str == "replicate")
    c.mode = Mode::replicate;
  else if (mode_str == "sweep")
    c.mode = Mode::sweep;
  else
    throw ConfigError("mode must be one of select, simulate, replicate, sweep");

  c.seed = get_field<std::uint64_t>(j, "seed", "config", 1);
  c.replications = get_field<int>(j, "replications", "config", 1);
  if (c.replications < 1) throw ConfigError("replications must be >= 1");
  c.workers = get_field<int>(j, "workers", "config", 1);
  if (c.workers < 1 || c.workers > 256) throw ConfigError("workers must lie in 1..256");
  c.output_dir = get_field<std::string>(j, "output_dir", "config", ".");
  c.dump_pvalues = get_field<bool>(j, "dump_pvalues", "config", false);
  c.dump_selection = get_field<bool>(j, "dump_selection", "config", false);

  if (j.contains("q") && j.contains("q_grid"))
    throw ConfigError("give either q or q_grid, not both");
  if (j.contains("q")) {
    c.q_values = {get_field<double>(j, "q", "config", 0.0)};
  } else if (j.contains("q_grid")) {
    c.q_values = get_field<std::vector<double>>(j, "q_grid", "config", {});
    if (c.q_values.empty()) throw ConfigError("q_grid must be a nonempty array");
  } else if (c.mode == Mode::sweep) {
    for (int i = 1; i <= 10; ++i) c.q_values.push_back(0.05 * i);
  } else if (c.mode != Mode::simulate) {
    throw ConfigError("q is required (or q_grid for a grid)");
  }
  for (const double q : c.q_values)
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("every q must lie in (0, 1)");
  std::sort(c.q_values.begin(), c.q_values.end());
  c.q_values.erase(std::unique(c.q_values.begin(), c.q_values.end()), c.q_values.end());

  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& name : get_field<std::vector<std::string>>(j, "methods", "config", {}))
      c.methods.push_back(parse_method(name));
    if (c.methods.empty()) throw ConfigError("methods must be a nonempty array");
    std::set<Method> seen;
    for (const Method m : c.methods)
      if (!seen.insert(m).second) throw ConfigError("duplicate method in methods");
  }

  if (j.contains("data")) {
    const auto& d = j.at("data");
    check_keys(d, "data",
               {"kind", "setting", "n", "p", "noise_level", "d_x", "d_y", "sigma", "rho"});
    c.data.kind = get_field<std::string>(d, "kind", "data", c.data.kind);
    if (c.data.kind != "univariate" && c.data.kind != "multivariate")
      throw ConfigError("data.kind must be univariate or multivariate");
    c.data.setting = get_field<int>(d, "setting", "data", c.data.setting);
    if (c.data.setting < 1 || c.data.setting > 6) throw ConfigError("data.setting must be 1..6");
    c.data.n = get_field<int>(d, "n", "data", c.data.n);
    if (c.data.n < 10) throw ConfigError("data.n must be >= 10");
    c.data.p = get_field<int>(d, "p", "data", c.data.p);
    if (c.data.p < 1) throw ConfigError("data.p must be >= 1");
    c.data.noise_level = get_field<double>(d, "noise_level", "data", c.data.noise_level);
    if (!(c.data.noise_level > 0.0)) throw ConfigError("data.noise_level must be positive");
    c.data.d_x = get_field<int>(d, "d_x", "data", c.data.d_x);
    c.data.d_y = get_field<int>(d, "d_y", "data", c.data.d_y);
    if (c.data.d_x < 1 || c.data.d_y < 1) throw ConfigError("data dimensions must be >= 1");
    c.data.sigma = get_field<double>(d, "sigma", "data", c.data.sigma);
    if (!(c.data.sigma > 0.0)) throw ConfigError("data.sigma must be positive");
    c.data.rho = get_field<double>(d, "rho", "data", c.data.rho);
  }

  if (j.contains("input")) {
    const auto& in = j.at("input");
    check_keys(in, "input", {"train", "cal", "test", "cal_predictions", "test_predictions"});
    c.input.train = get_field<std::string>(in, "train", "input", "");
    c.input.cal = get_field<std::string>(in, "cal", "input", "");
    c.input.test = get_field<std::string>(in, "test", "input", "");
    c.input.cal_predictions = get_field<std::string>(in, "cal_predictions", "input", "");
    c.input.test_predictions = get_field<std::string>(in, "test_predictions", "input", "");
  }

  if (j.contains("target")) {
    const auto& t = j.at("target");
    check_keys(t, "target",
               {"kind", "lo", "hi", "task", "knots", "intervals", "base_radius", "num_spheres",
                "radius"});
    c.target.kind = get_field<std::string>(t, "kind", "target", c.target.kind);
    static const std::set<std::string> kinds = {
        "conjunctive", "disjunctive", "task", "intervals", "shell", "multisphere", "centroid_ball"};
    if (!kinds.count(c.target.kind)) throw ConfigError("unknown target.kind '" + c.target.kind + "'");
    c.target.lo_set = t.contains("lo");
    c.target.hi_set = t.contains("hi");
    c.target.lo = get_field<double>(t, "lo", "target", 0.0);
    c.target.hi = get_field<double>(t, "hi", "target", 0.0);
    c.target.task = get_field<int>(t, "task", "target", c.target.task);
    c.target.knots = get_field<std::vector<double>>(t, "knots", "target", {});
    if (t.contains("intervals")) {
      if (!t.at("intervals").is_array()) throw ConfigError("target.intervals must be an array");
      for (const auto& one : t.at("intervals")) {
        check_keys(one, "target.intervals entry", {"lo", "hi"});
        IntervalSpec iv;
        if (one.contains("lo")) iv.lo = get_field<double>(one, "lo", "target.intervals", 0.0);
        if (one.contains("hi")) iv.hi = get_field<double>(one, "hi", "target.intervals", 0.0);
        if (!iv.lo && !iv.hi)
          throw ConfigError("each target interval needs at least one finite end");
        c.target.intervals.push_back(iv);
      }
    }
    c.target.base_radius = get_field<double>(t, "base_radius", "target", 0.0);
    c.target.num_spheres = get_field<int>(t, "num_spheres", "target", c.target.num_spheres);
    c.target.radius = get_field<double>(t, "radius", "target", 0.0);
  }
  // Kind-specific quantile-mass defaults.
  if (!c.target.lo_set) c.target.lo = c.target.kind == "disjunctive" ? 0.3 : 0.2;
  if (!c.target.hi_set) c.target.hi = c.target.kind == "disjunctive" ? 0.7 : 0.8;

  if (j.contains("predictor")) {
    const auto& p = j.at("predictor");
    check_keys(p, "predictor", {"kind", "lambda", "gamma"});
    c.predictor.kind = get_field<std::string>(p, "kind", "predictor", c.predictor.kind);
    if (c.predictor.kind != "ridge" && c.predictor.kind != "kernel_ridge")
      throw ConfigError("predictor.kind must be ridge or kernel_ridge");
    c.predictor.lambda = get_field<double>(p, "lambda", "predictor", c.predictor.lambda);
    c.predictor.gamma = get_field<double>(p, "gamma", "predictor", c.predictor.gamma);
    if (c.predictor.lambda < 0.0) throw ConfigError("predictor.lambda must be >= 0");
    if (c.predictor.kind == "kernel_ridge" && !(c.predictor.lambda > 0.0))
      throw ConfigError("kernel_ridge requires predictor.lambda > 0");
    if (c.predictor.gamma < 0.0) throw ConfigError("predictor.gamma must be >= 0");
  }

  if (j.contains("score")) {
    const auto& s = j.at("score");
    check_keys(s, "score", {"test_branch", "drop_pred_term", "exclude_outside_cal", "shared_u"});
    c.score.test_branch = get_field<std::string>(s, "test_branch", "score", c.score.test_branch);
    if (c.score.test_branch != "inside" && c.score.test_branch != "outside")
      throw ConfigError("score.test_branch must be inside or outside");
    c.score.drop_pred_term = get_field<bool>(s, "drop_pred_term", "score", false);
    c.score.exclude_outside_cal = get_field<bool>(s, "exclude_outside_cal", "score", false);
    c.score.shared_u = get_field<bool>(s, "shared_u", "score", false);
  }

  // ----- cross-field validation -----
  const bool generated = c.mode == Mode::replicate || c.mode == Mode::sweep || c.mode == Mode::simulate;
  const bool multivar = generated ? c.data.kind == "multivariate"
                                  : detail::is_region_kind(c.target.kind);

  if (c.mode != Mode::simulate) {
    if (generated && multivar != detail::is_region_kind(c.target.kind))
      throw ConfigError("multivariate data needs a region target (and univariate an interval one)");
    for (const Method m : c.methods) {
      const bool interval_only = m == Method::mccs || m == Method::baseline_int ||
                                 m == Method::baseline_int_b || m == Method::baseline_uni_b;
      if (interval_only && multivar)
        throw ConfigError(std::string("method ") + method_name(m) + " needs univariate data");
      if (m == Method::mrcs && !multivar) throw ConfigError("method mrcs needs multivariate data");
      if (multivar && m == Method::baseline_uni && c.target.kind == "shell")
        throw ConfigError("method uni needs a sphere-union region");
      if (multivar && m == Method::ind && c.target.kind == "shell")
        throw ConfigError("method ind needs a transformable (sphere-union) region");
      const bool two_threshold_baseline = m == Method::baseline_int || m == Method::baseline_uni ||
                                          m == Method::baseline_int_b || m == Method::baseline_uni_b;
      if (!multivar && two_threshold_baseline && c.target.kind != "conjunctive" &&
          c.target.kind != "disjunctive" && c.target.kind != "intervals")
        throw ConfigError(std::string("method ") + method_name(m) +
                          " needs a two-threshold target (conjunctive, disjunctive, or intervals)");
      if (!multivar && m == Method::ind && c.target.kind == "task" && c.target.task >= 4 &&
          c.target.knots.empty())
        throw ConfigError("method ind needs a disjoint target; tasks 4-6 overlap by default");
    }
    if (c.target.kind == "conjunctive" || c.target.kind == "disjunctive") {
      if (!(c.target.lo > 0.0 && c.target.lo < 1.0 && c.target.hi > 0.0 && c.target.hi < 1.0))
        throw ConfigError("target quantile masses must lie in (0, 1)");
      if (!(c.target.lo < c.target.hi)) throw ConfigError("target.lo must be below target.hi");
    }
    if (c.target.kind == "task") {
      if (c.target.task < 1 || c.target.task > 6) throw ConfigError("target.task must be 1..6");
      for (const double k : c.target.knots)
        if (!(k > 0.0 && k < 1.0)) throw ConfigError("target knots must lie in (0, 1)");
    }
    if (c.target.kind == "intervals" && c.target.intervals.empty())
      throw ConfigError("target.kind intervals needs a nonempty intervals array");
    for (const auto& iv : c.target.intervals)
      if (iv.lo && iv.hi && !(*iv.lo < *iv.hi))
        throw ConfigError("interval endpoints must satisfy lo < hi");
    if ((c.target.kind == "shell" || c.target.kind == "multisphere") &&
        !(c.target.base_radius > 0.0))
      throw ConfigError("region targets need a positive target.base_radius");
    if (c.target.kind == "multisphere" && c.target.num_spheres < 1)
      throw ConfigError("target.num_spheres must be >= 1");
    if (c.target.kind == "centroid_ball" && !(c.target.radius > 0.0))
      throw ConfigError("centroid_ball needs a positive target.radius");
  }

  if (c.mode == Mode::select) {
    if (c.q_values.size() != 1) throw ConfigError("select mode takes a single q");
    if (c.input.cal.empty()) throw ConfigError("select mode needs input.cal");
    const bool via_predictions =
        !c.input.cal_predictions.empty() || !c.input.test_predictions.empty();
    if (via_predictions) {
      if (c.input.cal_predictions.empty() || c.input.test_predictions.empty())
        throw ConfigError("prediction input needs both cal_predictions and test_predictions");
      if (!c.input.test.empty())
        throw ConfigError("give either prediction tables or a test feature file, not both");
    } else if (c.input.train.empty() || c.input.test.empty()) {
      throw ConfigError("select mode needs input.train and input.test (or prediction tables)");
    }
    const bool quantile_target = c.target.kind == "conjunctive" ||
                                 c.target.kind == "disjunctive" || c.target.kind == "task";
    if (quantile_target && c.input.train.empty())
      throw ConfigError("quantile targets need input.train for the threshold quantiles");
    if (c.target.kind == "centroid_ball" && c.input.train.empty())
      throw ConfigError("centroid_ball needs input.train for the centroid");
    for (const Method m : c.methods) {
      if (m == Method::ind && c.input.train.empty())
        throw ConfigError("method ind refits a model and needs input.train");
      if (m == Method::ind && via_predictions)
        throw ConfigError("method ind needs raw feature files, not prediction tables");
    }
    if (c.dump_pvalues) {
      bool has_matrix_method = false;
      for (const Method m : c.methods)
        has_matrix_method = has_matrix_method || m == Method::mccs || m == Method::mrcs;
      if (!has_matrix_method) throw ConfigError("dump_pvalues needs mccs or mrcs in methods");
    }
  }

  if ((c.mode == Mode::replicate || c.mode == Mode::sweep) &&
      (c.dump_pvalues || c.dump_selection)) {
    if (c.replications != 1 || c.q_values.size() != 1)
      throw ConfigError("dumps in replicate mode need replications = 1 and a single q");
    bool has_matrix_method = false;
    for (const Method m : c.methods)
      has_matrix_method = has_matrix_method || m == Method::mccs || m == Method::mrcs;
    if (c.dump_pvalues && !has_matrix_method)
      throw ConfigError("dump_pvalues needs mccs or mrcs in methods");
  }

  if (generated && multivar && c.data.d_y < 2)
    throw ConfigError("multivariate data needs data.d_y >= 2");

  c.digest = config_digest(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ===== shared pipeline pieces =====

namespace detail {

inline predictor::PredictorSpec predictor_spec(const PredictorConfig& p) {
  predictor::PredictorSpec spec;
  spec.kind = p.kind == "kernel_ridge" ? predictor::PredictorSpec::Kind::kernel_ridge
                                       : predictor::PredictorSpec::Kind::ridge;
  spec.lambda = p.lambda;
  spec.gamma = p.gamma;
  return spec;
}

inline select::PipelineOptions pipeline_options(const ScoreConfig& s) {
  select::PipelineOptions opts;
  opts.test_branch =
      s.test_branch == "outside" ? score::TestBranch::outside : score::TestBranch::inside;
  opts.drop_pred_term = s.drop_pred_term;
  opts.pv.exclude_outside_cal = s.exclude_outside_cal;
  opts.pv.shared_u = s.shared_u;
  return opts;
}

inline core::TargetSpec build_interval_target(const TargetConfig& t,
                                              const Eigen::VectorXd* train_y) {
  if (t.kind == "intervals") {
    std::vector<core::Interval> ivs;
    for (const auto& iv : t.intervals) {
      if (iv.lo && iv.hi)
        ivs.push_back(core::Interval::bounded(*iv.lo, *iv.hi));
      else if (iv.hi)
        ivs.push_back(core::Interval::less_than(*iv.hi));
      else
        ivs.push_back(core::Interval::greater_than(*iv.lo));
    }
    return core::TargetSpec(std::move(ivs));
  }
  if (train_y == nullptr)
    throw ConfigError("quantile targets need training responses for the thresholds");
  if (t.kind == "conjunctive")
    return simgen::make_quantile_union(*train_y, {{t.lo, t.hi}});
  if (t.kind == "disjunctive")
    return simgen::make_quantile_union(*train_y, {{std::nullopt, t.lo}, {t.hi, std::nullopt}});
  if (t.kind == "task") return simgen::make_task_target(t.task, *train_y, t.knots);
  throw ConfigError("target.kind '" + t.kind + "' is not an interval target");
}

inline core::RegionSpec build_region_target(const TargetConfig& t, Eigen::Index d,
                                            std::uint64_t master_seed,
                                            const Eigen::MatrixXd* train_y) {
  if (t.kind == "shell") return simgen::make_shell_region(static_cast<int>(d), t.base_radius);
  if (t.kind == "multisphere")
    return simgen::make_multisphere_region(static_cast<int>(d), t.num_spheres, t.base_radius,
                                           rng::derive(master_seed, {kRegionTag}));
  if (t.kind == "centroid_ball") {
    if (train_y == nullptr)
      throw ConfigError("centroid_ball needs training responses for the centroid");
    return simgen::centroid_ball_region(*train_y, t.radius);
  }
  throw ConfigError("target.kind '" + t.kind + "' is not a region target");
}

// Threshold pair for the two-condition baselines: a single bounded interval,
// or a left tail plus a right tail.
inline std::optional<std::pair<double, double>> two_thresholds(const core::TargetSpec& target) {
  const auto& ivs = target.intervals();
  if (ivs.size() == 1 && ivs[0].is_bounded()) return std::pair{*ivs[0].lower(), *ivs[0].upper()};
  if (ivs.size() == 2) {
    const core::Interval* left = nullptr;
    const core::Interval* right = nullptr;
    for (const auto& iv : ivs) {
      if (!iv.lower() && iv.upper()) left = &iv;
      if (iv.lower() && !iv.upper()) right = &iv;
    }
    if (left && right && *left->upper() < *right->lower())
      return std::pair{*left->upper(), *right->lower()};
  }
  return std::nullopt;
}

inline baselines::BaselineKind baseline_kind(Method m) {
  switch (m) {
    case Method::baseline_int: return baselines::BaselineKind::intersection;
    case Method::baseline_uni: return baselines::BaselineKind::union_;
    case Method::baseline_int_b: return baselines::BaselineKind::intersection_bonf;
    case Method::baseline_uni_b: return baselines::BaselineKind::union_bonf;
    default: throw std::logic_error("not a two-threshold baseline");
  }
}

}  // namespace detail

// ===== replication runners =====

struct MetricRow {
  Method method = Method::mccs;
  double q = 0.0;
  double fdp_sample = 0.0;
  double fdp_pair = 0.0;
  double power = 0.0;
};

// Captured single-instance artifacts for selection/p-value dumps.
struct RepArtifacts {
  std::optional<pvalue::PValueMatrix> matrix;  // first matrix-based method
  std::optional<select::SelectionResult> matrix_result;
  Method matrix_method = Method::mccs;
  std::vector<std::pair<Method, std::vector<std::size_t>>> sample_sets;
  Eigen::Index test_count = 0;
};

namespace detail {

// The interval-method switch shared by the replicate runner and select mode.
struct IntervalInstance {
  const ExperimentConfig& c;
  int replication = 0;
  Eigen::VectorXd cal_y, cal_preds, test_preds;
  core::TargetSpec target;
  select::PipelineOptions opts;
  // filled lazily
  std::optional<pvalue::PValueMatrix> matrix;

  // Ind preparation (set by the caller when the method list needs it).
  std::optional<Eigen::VectorXd> ind_cal_z, ind_cal_preds, ind_test_preds;

  void ensure_matrix() {
    if (matrix) return;
    const auto params = select::detail::interval_params(cal_preds, test_preds, target, opts);
    matrix = pvalue::pvalue_matrix(
        cal_y, cal_preds, test_preds, target, params,
        pvalue::TieBreakStream(c.seed, static_cast<std::uint64_t>(replication),
                               baselines::lanes::mccs),
        opts.pv);
  }

  // Selected samples for one (method, q); fills `pairs` for matrix methods.
  std::vector<std::size_t> run(Method m, double q, select::SelectionResult* result_out) {
    if (m == Method::mccs) {
      ensure_matrix();
      auto res = select::global_bh(*matrix, q);
      auto samples = res.samples;
      if (result_out) *result_out = std::move(res);
      return samples;
    }
    if (m == Method::ind) {
      if (!ind_cal_z) throw std::logic_error("ind preparation missing");
      const pvalue::TieBreakStream ties(c.seed, static_cast<std::uint64_t>(replication),
                                        baselines::lanes::ind);
      return baselines::cfbh_single(*ind_cal_z, *ind_cal_preds, *ind_test_preds,
                                    baselines::Side::greater, 0.0, q, ties, opts);
    }
    const auto thr = two_thresholds(target);
    if (!thr)
      throw ConfigError("two-threshold baselines need a single bounded interval or a pair of tails");
    const pvalue::TieBreakStream t1(c.seed, static_cast<std::uint64_t>(replication),
                                    baselines::lanes::branch_c1);
    const pvalue::TieBreakStream t2(c.seed, static_cast<std::uint64_t>(replication),
                                    baselines::lanes::branch_c2);
    return baselines::run_baseline(baseline_kind(m), cal_y, cal_preds, test_preds, thr->first,
                                   thr->second, q, t1, t2, opts);
  }
};

inline bool wants(const ExperimentConfig& c, Method m) {
  return std::find(c.methods.begin(), c.methods.end(), m) != c.methods.end();
}

}  // namespace detail

inline std::vector<MetricRow> run_rep_univariate(const ExperimentConfig& c, int r,
                                                 RepArtifacts* art) {
  const auto rep = static_cast<std::uint64_t>(r);
  const simgen::SettingSpec sspec{c.data.setting, c.data.p, c.data.noise_level,
                                  rng::derive(c.seed, {detail::kDataTag, rep})};
  const auto draw = simgen::gen_univariate(sspec, c.data.n);
  const auto split = simgen::split_8_1_1(draw.data, rng::derive(c.seed, {detail::kSplitTag, rep}));

  const Eigen::VectorXd train_y = split.train.response_vector();
  const auto target = detail::build_interval_target(c.target, &train_y);

  const auto pspec = detail::predictor_spec(c.predictor);
  const auto model = predictor::FittedModel::fit(pspec, split.train);

  detail::IntervalInstance inst{c,
                                r,
                                split.cal.response_vector(),
                                model.predict_scalar(split.cal.features()),
                                model.predict_scalar(split.test.features()),
                                target,
                                detail::pipeline_options(c.score)};

  if (detail::wants(c, Method::ind)) {
    Eigen::VectorXd z_train(split.train.rows()), z_cal(split.cal.rows());
    for (Eigen::Index i = 0; i < split.train.rows(); ++i)
      z_train(i) = baselines::indicator_transform(split.train.responses()(i, 0), target);
    for (Eigen::Index i = 0; i < split.cal.rows(); ++i)
      z_cal(i) = baselines::indicator_transform(split.cal.responses()(i, 0), target);
    const auto z_model = predictor::FittedModel::fit(pspec, split.train.features(), z_train);
    inst.ind_cal_z = std::move(z_cal);
    inst.ind_cal_preds = z_model.predict_scalar(split.cal.features());
    inst.ind_test_preds = z_model.predict_scalar(split.test.features());
  }

  const auto in_union = metrics::union_membership(split.test.responses(), target);
  const auto in_cols = metrics::pair_membership(split.test.responses(), target);

  std::vector<MetricRow> rows;
  for (const Method m : c.methods) {
    for (const double q : c.q_values) {
      select::SelectionResult res;
      const bool matrix_method = m == Method::mccs;
      const auto samples = inst.run(m, q, matrix_method ? &res : nullptr);
      const double fs = metrics::fdp_sample(samples, in_union);
      const double fp = matrix_method ? metrics::fdp_pair(res.pairs, in_cols) : fs;
      rows.push_back({m, q, fs, fp, metrics::power(samples, in_union)});
      if (art) {
        art->sample_sets.emplace_back(m, samples);
        if (matrix_method && !art->matrix_result) {
          art->matrix_result = std::move(res);
          art->matrix_method = m;
        }
      }
    }
  }
  if (art) {
    art->test_count = inst.test_preds.size();
    if (inst.matrix) art->matrix = std::move(inst.matrix);
  }
  return rows;
}

inline std::vector<MetricRow> run_rep_multivariate(const ExperimentConfig& c, int r,
                                                   RepArtifacts* art) {
  const auto rep = static_cast<std::uint64_t>(r);
  const simgen::MvSpec mspec{c.data.d_x, c.data.d_y, c.data.sigma, c.data.rho,
                             rng::derive(c.seed, {detail::kDataTag, rep})};
  const auto data = simgen::gen_multivariate(mspec, c.data.n);
  const auto split = simgen::split_8_1_1(data, rng::derive(c.seed, {detail::kSplitTag, rep}));

  const Eigen::MatrixXd& train_y = split.train.responses();
  const auto region = detail::build_region_target(c.target, split.cal.response_dim(), c.seed,
                                                  &train_y);
  const auto columns = select::region_columns(region);

  const auto pspec = detail::predictor_spec(c.predictor);
  const auto model = predictor::FittedModel::fit(pspec, split.train);
  const Eigen::MatrixXd cal_preds = model.predict(split.cal.features());
  const Eigen::MatrixXd test_preds = model.predict(split.test.features());
  const auto opts = detail::pipeline_options(c.score);

  const auto in_union = metrics::union_membership(split.test.responses(), region);
  const auto in_cols = metrics::pair_membership(split.test.responses(), region);

  // q-independent matrices, built once.
  std::optional<pvalue::PValueMatrix> matrix;
  if (detail::wants(c, Method::mrcs)) {
    const auto params = select::detail::region_params(cal_preds, test_preds, columns, opts);
    matrix = pvalue::pvalue_matrix(split.cal.responses(), cal_preds, test_preds, columns, params,
                                   pvalue::TieBreakStream(c.seed, rep, baselines::lanes::mccs),
                                   opts.pv);
  }
  std::vector<pvalue::PValueMatrix> ball_matrices;
  if (detail::wants(c, Method::baseline_uni)) {
    for (std::size_t s = 0; s < columns.size(); ++s) {
      const std::span<const core::RegionSpec> one(&columns[s], 1);
      const auto params = select::detail::region_params(cal_preds, test_preds, one, opts);
      ball_matrices.push_back(pvalue::pvalue_matrix(
          split.cal.responses(), cal_preds, test_preds, one, params,
          pvalue::TieBreakStream(c.seed, rep, baselines::lanes::region_base + s), opts.pv));
    }
  }
  std::optional<Eigen::VectorXd> ind_cal_z, ind_cal_preds, ind_test_preds;
  if (detail::wants(c, Method::ind)) {
    Eigen::VectorXd z_train(split.train.rows()), z_cal(split.cal.rows());
    for (Eigen::Index i = 0; i < split.train.rows(); ++i) {
      const Eigen::VectorXd y = split.train.responses().row(i).transpose();
      z_train(i) = baselines::indicator_transform(y, region);
    }
    for (Eigen::Index i = 0; i < split.cal.rows(); ++i) {
      const Eigen::VectorXd y = split.cal.responses().row(i).transpose();
      z_cal(i) = baselines::indicator_transform(y, region);
    }
    const auto z_model = predictor::FittedModel::fit(pspec, split.train.features(), z_train);
    ind_cal_z = std::move(z_cal);
    ind_cal_preds = z_model.predict_scalar(split.cal.features());
    ind_test_preds = z_model.predict_scalar(split.test.features());
  }

  std::vector<MetricRow> rows;
  for (const Method m : c.methods) {
    for (const double q : c.q_values) {
      std::vector<std::size_t> samples;
      select::SelectionResult res;
      bool matrix_method = false;
      if (m == Method::mrcs) {
        matrix_method = true;
        res = select::global_bh(*matrix, q);
        samples = res.samples;
      } else if (m == Method::baseline_uni) {
        for (const auto& bm : ball_matrices)
          samples = baselines::combine_uni(samples, select::global_bh(bm, q).samples);
      } else if (m == Method::ind) {
        const pvalue::TieBreakStream ties(c.seed, rep, baselines::lanes::ind);
        samples = baselines::cfbh_single(*ind_cal_z, *ind_cal_preds, *ind_test_preds,
                                         baselines::Side::greater, 0.0, q, ties, opts);
      } else {
        throw std::logic_error("method not valid for multivariate data");
      }
      const double fs = metrics::fdp_sample(samples, in_union);
      const double fp = matrix_method ? metrics::fdp_pair(res.pairs, in_cols) : fs;
      rows.push_back({m, q, fs, fp, metrics::power(samples, in_union)});
      if (art) {
        art->sample_sets.emplace_back(m, samples);
        if (matrix_method && !art->matrix_result) {
          art->matrix_result = std::move(res);
          art->matrix_method = m;
        }
      }
    }
  }
  if (art) {
    art->test_count = test_preds.rows();
    if (matrix) art->matrix = std::move(matrix);
  }
  return rows;
}

inline std::vector<MetricRow> run_replication(const ExperimentConfig& c, int r, RepArtifacts* art) {
  return c.data.kind == "multivariate" ? run_rep_multivariate(c, r, art)
                                       : run_rep_univariate(c, r, art);
}

// ===== output writers =====

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw csv::DataError("cannot write '" + path.string() + "'");
  return out;
}

inline void write_metrics_csv(const std::filesystem::path& path,
                              const std::vector<std::vector<MetricRow>>& per_rep) {
  auto out = open_out(path);
  out << "replication,method,q,fdp_sample,fdp_pair,power\n";
  for (std::size_t r = 0; r < per_rep.size(); ++r)
    for (const auto& row : per_rep[r])
      out << r << ',' << method_name(row.method) << ',' << csv::format_number(row.q) << ','
          << csv::format_number(row.fdp_sample) << ',' << csv::format_number(row.fdp_pair) << ','
          << csv::format_number(row.power) << '\n';
}

inline nlohmann::json summarize(const ExperimentConfig& c,
                                const std::vector<std::vector<MetricRow>>& per_rep) {
  nlohmann::json summary;
  summary["version"] = kVersion;
  summary["mode"] = mode_name(c.mode);
  summary["config_digest"] = c.digest;
  summary["replications"] = c.replications;

  nlohmann::json results = nlohmann::json::array();
  const std::size_t combos = c.methods.size() * c.q_values.size();
  for (std::size_t idx = 0; idx < combos; ++idx) {
    std::vector<double> fdp_s, fdp_p, pw;
    for (const auto& rows : per_rep) {
      fdp_s.push_back(rows[idx].fdp_sample);
      fdp_p.push_back(rows[idx].fdp_pair);
      pw.push_back(rows[idx].power);
    }
    const auto fdr = metrics::aggregate(fdp_s);
    const auto fpr = metrics::aggregate(fdp_p);
    const auto pow = metrics::aggregate(pw);
    nlohmann::json one;
    one["method"] = method_name(c.methods[idx / c.q_values.size()]);
    one["q"] = c.q_values[idx % c.q_values.size()];
    one["fdr_estimate"] = fdr.mean;
    one["se"] = fdr.se;
    one["power_estimate"] = pow.mean;
    one["power_se"] = pow.se;
    one["fdp_pair_estimate"] = fpr.mean;
    if (fdr.degenerate) one["degenerate"] = true;
    results.push_back(std::move(one));
  }
  summary["results"] = results;
  if (results.size() == 1) {
    summary["fdr_estimate"] = results[0]["fdr_estimate"];
    summary["se"] = results[0]["se"];
    summary["power_estimate"] = results[0]["power_estimate"];
    summary["power_se"] = results[0]["power_se"];
  }
  return summary;
}

inline void write_pvalues_csv(const std::filesystem::path& path,
                              const pvalue::PValueMatrix& matrix) {
  auto out = open_out(path);
  out << "j,k,p,u\n";
  for (Eigen::Index j = 0; j < matrix.tests(); ++j)
    for (Eigen::Index k = 0; k < matrix.columns(); ++k)
      out << j << ',' << k << ',' << csv::format_number(matrix.values(j, k)) << ','
          << csv::format_number(matrix.u_draws(j, k)) << '\n';
}

inline void write_selection_csv(const std::filesystem::path& path, const ExperimentConfig& c,
                                const RepArtifacts& art) {
  auto out = open_out(path);
  bool with_method = c.methods.size() > 1;
  for (const Method m : c.methods)
    with_method = with_method || (m != Method::mccs && m != Method::mrcs);
  out << (with_method ? "j,k,p,selected,method\n" : "j,k,p,selected\n");

  for (const auto& [m, samples] : art.sample_sets) {
    if ((m == Method::mccs || m == Method::mrcs) && art.matrix && art.matrix_method == m) {
      const auto& matrix = *art.matrix;
      const auto& res = *art.matrix_result;
      for (Eigen::Index j = 0; j < matrix.tests(); ++j)
        for (Eigen::Index k = 0; k < matrix.columns(); ++k) {
          const bool sel = res.cut_index > 0 && matrix.values(j, k) <= res.cutoff;
          out << j << ',' << k << ',' << csv::format_number(matrix.values(j, k)) << ','
              << (sel ? 1 : 0);
          if (with_method) out << ',' << method_name(m);
          out << '\n';
        }
    } else {
      std::vector<bool> selected(static_cast<std::size_t>(art.test_count), false);
      for (const auto j : samples) selected[j] = true;
      for (Eigen::Index j = 0; j < art.test_count; ++j) {
        out << j << ",0,," << (selected[static_cast<std::size_t>(j)] ? 1 : 0);
        if (with_method) out << ',' << method_name(m);
        out << '\n';
      }
    }
  }
}

inline void write_result_json(const std::filesystem::path& path, const ExperimentConfig& c,
                              const RepArtifacts& art) {
  nlohmann::json out;
  out["version"] = kVersion;
  out["config_digest"] = c.digest;
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [m, samples] : art.sample_sets) {
    nlohmann::json one;
    if ((m == Method::mccs || m == Method::mrcs) && art.matrix_result && art.matrix_method == m) {
      one["cut_index"] = art.matrix_result->cut_index;
      one["cutoff"] = art.matrix_result->cutoff;
      one["counts"] = {{"pairs", art.matrix_result->pairs.size()}, {"samples", samples.size()}};
    } else {
      one["counts"] = {{"samples", samples.size()}};
    }
    methods[method_name(m)] = std::move(one);
  }
  out["methods"] = methods;
  if (c.methods.size() == 1 && art.matrix_result) {
    out["cut_index"] = art.matrix_result->cut_index;
    out["cutoff"] = art.matrix_result->cutoff;
    out["counts"] = methods[method_name(c.methods[0])]["counts"];
  }
  auto file = open_out(path);
  file << out.dump(2) << '\n';
}

}  // namespace detail

// ===== mode drivers =====

struct RunReport {
  std::vector<std::string> files;
};

inline RunReport run_replicate(const ExperimentConfig& c) {
  const int R = c.replications;
  std::vector<std::vector<MetricRow>> per_rep(static_cast<std::size_t>(R));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(R));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};

  auto body = [&] {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= R || failed.load()) break;
      try {
        per_rep[static_cast<std::size_t>(r)] = run_replication(c, r, nullptr);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const int workers = std::min(c.workers, R);
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) {
    for (std::size_t r = 0; r < errors.size(); ++r) {
      if (!errors[r]) continue;
      try {
        std::rethrow_exception(errors[r]);
      } catch (const std::exception& e) {
        throw std::runtime_error("replication " + std::to_string(r) + " failed: " + e.what());
      }
    }
  }

  const std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  RunReport report;

  detail::write_metrics_csv(dir / "metrics.csv", per_rep);
  report.files.push_back((dir / "metrics.csv").string());

  {
    auto out = detail::open_out(dir / "summary.json");
    out << detail::summarize(c, per_rep).dump(2) << '\n';
    report.files.push_back((dir / "summary.json").string());
  }

  if (c.dump_pvalues || c.dump_selection) {
    RepArtifacts art;
    run_replication(c, 0, &art);
    if (c.dump_pvalues && art.matrix) {
      detail::write_pvalues_csv(dir / "pvalues.csv", *art.matrix);
      report.files.push_back((dir / "pvalues.csv").string());
    }
    if (c.dump_selection) {
      detail::write_selection_csv(dir / "selection.csv", c, art);
      report.files.push_back((dir / "selection.csv").string());
    }
  }
  return report;
}

inline RunReport run_simulate(const ExperimentConfig& c) {
  const std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);
  core::LabeledSet data = [&] {
    const auto seed = rng::derive(c.seed, {detail::kDataTag, 0});
    if (c.data.kind == "multivariate")
      return simgen::gen_multivariate({c.data.d_x, c.data.d_y, c.data.sigma, c.data.rho, seed},
                                      c.data.n);
    const simgen::SettingSpec spec{c.data.setting, c.data.p, c.data.noise_level, seed};
    return simgen::gen_univariate(spec, c.data.n).data;
  }();
  const auto path = dir / "dataset.csv";
  csv::write_labeled(path.string(), data);
  return {{path.string()}};
}

inline RunReport run_select(const ExperimentConfig& c) {
  const double q = c.q_values.front();
  const std::filesystem::path dir(c.output_dir);
  std::filesystem::create_directories(dir);

  const auto cal = csv::read_labeled(c.input.cal);
  std::optional<core::LabeledSet> train;
  if (!c.input.train.empty()) train = csv::read_labeled(c.input.train);
  if (train && train->response_dim() != cal.response_dim())
    throw csv::DataError("train and calibration response dimensions differ");

  const auto pspec = detail::predictor_spec(c.predictor);
  const auto opts = detail::pipeline_options(c.score);
  const bool via_predictions = !c.input.cal_predictions.empty();

  RepArtifacts art;
  const bool region_mode = detail::is_region_kind(c.target.kind);

  if (!region_mode) {
    if (cal.response_dim() != 1)
      throw csv::DataError("interval targets need univariate responses in the calibration file");
    Eigen::VectorXd cal_preds, test_preds;
    std::optional<core::FeatureSet> test_x;
    std::optional<predictor::FittedModel> model;
    if (via_predictions) {
      const auto cp = csv::read_predictions(c.input.cal_predictions);
      const auto tp = csv::read_predictions(c.input.test_predictions);
      if (cp.cols() != 1 || tp.cols() != 1)
        throw csv::DataError("interval targets need single-column prediction tables");
      if (cp.rows() != cal.rows())
        throw csv::DataError("calibration predictions do not match the calibration rows");
      cal_preds = cp.col(0);
      test_preds = tp.col(0);
    } else {
      test_x = csv::read_features(c.input.test);
      model = predictor::FittedModel::fit(pspec, *train);
      cal_preds = model->predict_scalar(cal.features());
      test_preds = model->predict_scalar(test_x->features());
    }

    std::optional<Eigen::VectorXd> train_y;
    if (train) train_y = train->response_vector();
    const auto target = detail::build_interval_target(c.target, train_y ? &*train_y : nullptr);

    detail::IntervalInstance inst{c, 0, cal.response_vector(), cal_preds, test_preds, target, opts};
    if (detail::wants(c, Method::ind)) {
      Eigen::VectorXd z_train(train->rows()), z_cal(cal.rows());
      for (Eigen::Index i = 0; i < train->rows(); ++i)
        z_train(i) = baselines::indicator_transform(train->responses()(i, 0), target);
      for (Eigen::Index i = 0; i < cal.rows(); ++i)
        z_cal(i) = baselines::indicator_transform(cal.responses()(i, 0), target);
      const auto z_model = predictor::FittedModel::fit(pspec, train->features(), z_train);
      inst.ind_cal_z = std::move(z_cal);
      inst.ind_cal_preds = z_model.predict_scalar(cal.features());
      inst.ind_test_preds = z_model.predict_scalar(test_x->features());
    }

    for (const Method m : c.methods) {
      select::SelectionResult res;
      const bool matrix_method = m == Method::mccs;
      const auto samples = inst.run(m, q, matrix_method ? &res : nullptr);
      art.sample_sets.emplace_back(m, samples);
      if (matrix_method && !art.matrix_result) {
        art.matrix_result = std::move(res);
        art.matrix_method = m;
      }
    }
    art.test_count = test_preds.size();
    if (inst.matrix) art.matrix = std::move(inst.matrix);
  } else {
    if (cal.response_dim() < 2)
      throw csv::DataError("region targets need multivariate responses in the calibration file");
    Eigen::MatrixXd cal_preds, test_preds;
    std::optional<core::FeatureSet> test_x;
    std::optional<predictor::FittedModel> model;
    if (via_predictions) {
      cal_preds = csv::read_predictions(c.input.cal_predictions);
      test_preds = csv::read_predictions(c.input.test_predictions);
      if (cal_preds.cols() != cal.response_dim())
        throw csv::DataError("prediction columns must match the response dimension");
      if (cal_preds.rows() != cal.rows())
        throw csv::DataError("calibration predictions do not match the calibration rows");
      if (test_preds.cols() != cal.response_dim())
        throw csv::DataError("prediction columns must match the response dimension");
    } else {
      test_x = csv::read_features(c.input.test);
      model = predictor::FittedModel::fit(pspec, *train);
      cal_preds = model->predict(cal.features());
      test_preds = model->predict(test_x->features());
    }

    const auto region = detail::build_region_target(
        c.target, cal.response_dim(), c.seed, train ? &train->responses() : nullptr);
    const auto columns = select::region_columns(region);

    for (const Method m : c.methods) {
      if (m == Method::mrcs) {
        const auto params = select::detail::region_params(cal_preds, test_preds, columns, opts);
        auto matrix = pvalue::pvalue_matrix(cal.responses(), cal_preds, test_preds, columns,
                                            params,
                                            pvalue::TieBreakStream(c.seed, 0, baselines::lanes::mccs),
                                            opts.pv);
        auto res = select::global_bh(matrix, q);
        art.sample_sets.emplace_back(m, res.samples);
        if (!art.matrix_result) {
          art.matrix = std::move(matrix);
          art.matrix_result = std::move(res);
          art.matrix_method = m;
        }
      } else if (m == Method::baseline_uni) {
        std::vector<std::size_t> samples;
        for (std::size_t s = 0; s < columns.size(); ++s) {
          const std::span<const core::RegionSpec> one(&columns[s], 1);
          const auto params = select::detail::region_params(cal_preds, test_preds, one, opts);
          const auto bm = pvalue::pvalue_matrix(
              cal.responses(), cal_preds, test_preds, one, params,
              pvalue::TieBreakStream(c.seed, 0, baselines::lanes::region_base + s), opts.pv);
          samples = baselines::combine_uni(samples, select::global_bh(bm, q).samples);
        }
        art.sample_sets.emplace_back(m, samples);
      } else if (m == Method::ind) {
        Eigen::VectorXd z_train(train->rows()), z_cal(cal.rows());
        for (Eigen::Index i = 0; i < train->rows(); ++i) {
          const Eigen::VectorXd y = train->responses().row(i).transpose();
          z_train(i) = baselines::indicator_transform(y, region);
        }
        for (Eigen::Index i = 0; i < cal.rows(); ++i) {
          const Eigen::VectorXd y = cal.responses().row(i).transpose();
          z_cal(i) = baselines::indicator_transform(y, region);
        }
        const auto z_model = predictor::FittedModel::fit(pspec, train->features(), z_train);
        const pvalue::TieBreakStream ties(c.seed, 0, baselines::lanes::ind);
        art.sample_sets.emplace_back(
            m, baselines::cfbh_single(z_cal, z_model.predict_scalar(cal.features()),
                                      z_model.predict_scalar(test_x->features()),
                                      baselines::Side::greater, 0.0, q, ties, opts));
      } else {
        throw ConfigError(std::string("method ") + method_name(m) +
                          " is not available for region targets");
      }
    }
    art.test_count = test_preds.rows();
  }

  RunReport report;
  detail::write_selection_csv(dir / "selection.csv", c, art);
  report.files.push_back((dir / "selection.csv").string());
  detail::write_result_json(dir / "result.json", c, art);
  report.files.push_back((dir / "result.json").string());
  if (c.dump_pvalues && art.matrix) {
    detail::write_pvalues_csv(dir / "pvalues.csv", *art.matrix);
    report.files.push_back((dir / "pvalues.csv").string());
  }
  return report;
}

inline RunReport run(const ExperimentConfig& c) {
  switch (c.mode) {
    case Mode::select: return run_select(c);
    case Mode::simulate: return run_simulate(c);
    case Mode::replicate:
    case Mode::sweep: return run_replicate(c);
  }
  throw std::logic_error("unreachable mode");
}

}  // namespace confsel::experiment
