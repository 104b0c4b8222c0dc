// Command-line front end. A config file (JSON) is the base; any flag that is
// passed overrides the matching key. The subcommand picks the mode.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "confsel/confsel.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int replications = 0;
  int workers = 0;
  double q = 0.0;
  std::vector<double> q_grid;
  std::vector<std::string> methods;
  std::string output_dir;
  bool dump_pvalues = false;
  bool dump_selection = false;

  std::string data_kind;
  int setting = 0;
  int n = 0;
  int p = 0;
  double noise_level = 0.0;
  int d_x = 0;
  int d_y = 0;
  double sigma = 0.0;
  double rho = 0.0;

  std::string train, cal, test, cal_predictions, test_predictions;

  std::string target_kind;
  double lo = 0.0, hi = 0.0;
  int task = 0;
  std::vector<double> knots;
  std::vector<std::string> intervals;
  double base_radius = 0.0;
  int num_spheres = 0;
  double radius = 0.0;

  std::string predictor;
  double lambda = 0.0;
  double gamma = 0.0;

  std::string test_branch;
  bool drop_pred_term = false;
  bool exclude_outside_cal = false;
  bool shared_u = false;
};

// One bounded or one-sided interval given as "lo:hi"; either side may be
// empty, "inf", or "-inf" to leave that end open.
json parse_interval_flag(const std::string& text) {
  const auto sep = text.find(':');
  if (sep == std::string::npos)
    throw confsel::experiment::ConfigError("--interval takes lo:hi (either side may be empty)");
  auto side = [&](std::string s) -> json {
    if (s.empty() || s == "inf" || s == "-inf" || s == "+inf") return nullptr;
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw confsel::experiment::ConfigError("bad interval endpoint '" + s + "'");
    }
  };
  json iv = json::object();
  const json lo = side(text.substr(0, sep));
  const json hi = side(text.substr(sep + 1));
  if (!lo.is_null()) iv["lo"] = lo;
  if (!hi.is_null()) iv["hi"] = hi;
  return iv;
}

struct Wiring {
  CLI::App* cmd = nullptr;
  std::string mode;
  std::vector<std::function<void(json&)>> appliers;
};

void add_common_options(CLI::App* cmd, Flags& f, Wiring& w) {
  auto on = [&w](CLI::Option* opt, std::function<void(json&)> apply) {
    w.appliers.push_back([opt, apply = std::move(apply)](json& j) {
      if (opt->count() > 0) apply(j);
    });
  };

  on(cmd->add_option("--config", f.config, "JSON config file used as the base"), [](json&) {});
  on(cmd->add_option("--seed", f.seed, "master seed"), [&f](json& j) { j["seed"] = f.seed; });
  on(cmd->add_option("-R,--replications", f.replications, "Monte Carlo replications"),
     [&f](json& j) { j["replications"] = f.replications; });
  on(cmd->add_option("--workers", f.workers, "worker threads"),
     [&f](json& j) { j["workers"] = f.workers; });
  on(cmd->add_option("-q,--q", f.q, "FDR level"), [&f](json& j) {
    j["q"] = f.q;
    j.erase("q_grid");
  });
  on(cmd->add_option("--q-grid", f.q_grid, "explicit FDR grid"), [&f](json& j) {
    j["q_grid"] = f.q_grid;
    j.erase("q");
  });
  on(cmd->add_option("-m,--method", f.methods,
                     "method (repeatable): mccs mrcs int uni int_b uni_b ind"),
     [&f](json& j) { j["methods"] = f.methods; });
  on(cmd->add_option("-o,--output-dir", f.output_dir, "output directory"),
     [&f](json& j) { j["output_dir"] = f.output_dir; });
  on(cmd->add_flag("--dump-pvalues", f.dump_pvalues, "write pvalues.csv"),
     [&f](json& j) { j["dump_pvalues"] = f.dump_pvalues; });
  on(cmd->add_flag("--dump-selection", f.dump_selection, "write selection.csv"),
     [&f](json& j) { j["dump_selection"] = f.dump_selection; });

  on(cmd->add_option("--data-kind", f.data_kind, "univariate | multivariate"),
     [&f](json& j) { j["data"]["kind"] = f.data_kind; });
  on(cmd->add_option("--setting", f.setting, "generator setting 1..6"),
     [&f](json& j) { j["data"]["setting"] = f.setting; });
  on(cmd->add_option("-n,--n", f.n, "dataset size"), [&f](json& j) { j["data"]["n"] = f.n; });
  on(cmd->add_option("-p,--p", f.p, "feature dimension"), [&f](json& j) { j["data"]["p"] = f.p; });
  on(cmd->add_option("--noise-level", f.noise_level, "noise scale"),
     [&f](json& j) { j["data"]["noise_level"] = f.noise_level; });
  on(cmd->add_option("--d-x", f.d_x, "multivariate feature dimension"),
     [&f](json& j) { j["data"]["d_x"] = f.d_x; });
  on(cmd->add_option("--d-y", f.d_y, "multivariate response dimension"),
     [&f](json& j) { j["data"]["d_y"] = f.d_y; });
  on(cmd->add_option("--sigma", f.sigma, "multivariate noise scale"),
     [&f](json& j) { j["data"]["sigma"] = f.sigma; });
  on(cmd->add_option("--rho", f.rho, "multivariate noise equicorrelation"),
     [&f](json& j) { j["data"]["rho"] = f.rho; });

  on(cmd->add_option("--train", f.train, "training CSV (x_1..x_p, y_1..y_d)"),
     [&f](json& j) { j["input"]["train"] = f.train; });
  on(cmd->add_option("--cal", f.cal, "calibration CSV"),
     [&f](json& j) { j["input"]["cal"] = f.cal; });
  on(cmd->add_option("--test", f.test, "test feature CSV (x_1..x_p)"),
     [&f](json& j) { j["input"]["test"] = f.test; });
  on(cmd->add_option("--cal-predictions", f.cal_predictions, "calibration prediction table"),
     [&f](json& j) { j["input"]["cal_predictions"] = f.cal_predictions; });
  on(cmd->add_option("--test-predictions", f.test_predictions, "test prediction table"),
     [&f](json& j) { j["input"]["test_predictions"] = f.test_predictions; });

  on(cmd->add_option("--target-kind", f.target_kind,
                     "conjunctive | disjunctive | task | intervals | shell | multisphere | "
                     "centroid_ball"),
     [&f](json& j) { j["target"]["kind"] = f.target_kind; });
  on(cmd->add_option("--lo", f.lo, "lower quantile mass"),
     [&f](json& j) { j["target"]["lo"] = f.lo; });
  on(cmd->add_option("--hi", f.hi, "upper quantile mass"),
     [&f](json& j) { j["target"]["hi"] = f.hi; });
  on(cmd->add_option("--task", f.task, "task pattern 1..6"),
     [&f](json& j) { j["target"]["task"] = f.task; });
  on(cmd->add_option("--knots", f.knots, "task quantile knots"),
     [&f](json& j) { j["target"]["knots"] = f.knots; });
  on(cmd->add_option("--interval", f.intervals, "absolute interval lo:hi (repeatable)"),
     [&f](json& j) {
       json arr = json::array();
       for (const auto& text : f.intervals) arr.push_back(parse_interval_flag(text));
       j["target"]["intervals"] = arr;
     });
  on(cmd->add_option("--base-radius", f.base_radius, "shell/multisphere base radius"),
     [&f](json& j) { j["target"]["base_radius"] = f.base_radius; });
  on(cmd->add_option("--num-spheres", f.num_spheres, "spheres in the union"),
     [&f](json& j) { j["target"]["num_spheres"] = f.num_spheres; });
  on(cmd->add_option("--radius", f.radius, "centroid ball radius"),
     [&f](json& j) { j["target"]["radius"] = f.radius; });

  on(cmd->add_option("--predictor", f.predictor, "ridge | kernel_ridge"),
     [&f](json& j) { j["predictor"]["kind"] = f.predictor; });
  on(cmd->add_option("--lambda", f.lambda, "ridge penalty"),
     [&f](json& j) { j["predictor"]["lambda"] = f.lambda; });
  on(cmd->add_option("--gamma", f.gamma, "RBF bandwidth (0 = heuristic)"),
     [&f](json& j) { j["predictor"]["gamma"] = f.gamma; });

  on(cmd->add_option("--test-branch", f.test_branch, "inside | outside"),
     [&f](json& j) { j["score"]["test_branch"] = f.test_branch; });
  on(cmd->add_flag("--drop-pred-term", f.drop_pred_term, "simplified bounded-interval score"),
     [&f](json& j) { j["score"]["drop_pred_term"] = f.drop_pred_term; });
  on(cmd->add_flag("--exclude-outside-cal", f.exclude_outside_cal,
                   "drop out-of-target calibration rows per column"),
     [&f](json& j) { j["score"]["exclude_outside_cal"] = f.exclude_outside_cal; });
  on(cmd->add_flag("--shared-u", f.shared_u, "one tie-break draw per test unit"),
     [&f](json& j) { j["score"]["shared_u"] = f.shared_u; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FDR-controlled conformal selection harness"};
  app.set_version_flag("--version", confsel::experiment::kVersion);
  app.require_subcommand(0, 1);

  Flags flags;
  std::vector<Wiring> wirings;
  wirings.reserve(4);
  for (const char* mode : {"select", "simulate", "replicate", "sweep"}) {
    Wiring w;
    w.mode = mode;
    w.cmd = app.add_subcommand(mode);
    add_common_options(w.cmd, flags, w);
    wirings.push_back(std::move(w));
  }
  std::string root_config;
  app.add_option("--config", root_config, "JSON config file (mode read from the file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : confsel::experiment::kExitConfig;
  }

  try {
    json base = json::object();
    const Wiring* active = nullptr;
    for (const auto& w : wirings)
      if (w.cmd->parsed()) active = &w;

    const std::string config_path = active && !flags.config.empty() ? flags.config : root_config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw confsel::experiment::ConfigError("cannot open config file '" + config_path + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      try {
        base = json::parse(buf.str());
      } catch (const json::exception& e) {
        throw confsel::experiment::ConfigError(std::string("config is not valid JSON: ") +
                                               e.what());
      }
    }
    if (active) {
      base["mode"] = active->mode;
      for (const auto& apply : active->appliers) apply(base);
    } else if (!base.contains("mode")) {
      throw confsel::experiment::ConfigError(
          "give a subcommand (select, simulate, replicate, sweep) or a config with a mode");
    }

    const auto cfg = confsel::experiment::parse_config(base);
    const auto report = confsel::experiment::run(cfg);
    for (const auto& file : report.files) std::cout << "wrote " << file << '\n';
    return 0;
  } catch (const confsel::experiment::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return confsel::experiment::kExitConfig;
  } catch (const confsel::csv::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return confsel::experiment::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
