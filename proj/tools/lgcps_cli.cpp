// Command-line driver. Every subcommand writes into one output directory:
// artifact CSV/JSON files plus manifest.json. Values come from defaults, then
// the JSON --config file, then explicit flags.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lgcps/lgcps.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Failure : std::runtime_error {
  Failure(lgcps_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  lgcps_status status;
};

void check(lgcps_status s, const std::string& context) {
  if (s != LGCPS_OK) throw Failure(s, context + ": " + lgcps_last_error());
}

// Owning wrapper for the C handles.
template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Pattern = Handle<lgcps_pattern, lgcps_pattern_free>;
using Prior = Handle<lgcps_prior, lgcps_prior_free>;
using Pilot = Handle<lgcps_pilot, lgcps_pilot_free>;
using Posterior = Handle<lgcps_posterior, lgcps_posterior_free>;
using Envelope = Handle<lgcps_envelope, lgcps_envelope_free>;
using Table = Handle<lgcps_reference_table, lgcps_reference_table_free>;
using Forest = Handle<lgcps_forest, lgcps_forest_free>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  lgcps_string_free(s);
  return out;
}

struct Settings {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "run";

  std::string model = "lgcp-strauss";
  std::string prior = "P1";
  std::string pattern;
  std::string posterior;
  std::string pilot;
  std::vector<double> window = {0.0, 1.0, 0.0, 1.0};

  double mu = 5.0;
  double sigma2 = 1.0;
  double s = 0.05;
  double gamma = 0.5;
  double R = 0.02;

  int nx = 64;
  int ny = 64;
  std::uint64_t burnin = 20000;
  std::uint64_t iters = 20000;

  int n_r = 40;
  double r_fraction = 0.2;
  std::vector<int> quadrat_orders = {2, 3, 4, 5};

  std::size_t k_pilot = 10000;
  std::size_t k_abc = 1000;
  std::size_t m = 10;
  double quantile = 0.01;
  std::size_t budget_factor = 1000;
  int cv_folds = 10;

  std::size_t n_sims = 1000;
  double level = 0.95;

  std::size_t n_ref = 30000;
  int trees = 500;
};

// Binds a flag to a settings field and lets a config key fill it when the
// flag was not given.
class Binder {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
    CLI::Option* opt = app->add_option(flag, var, help)->capture_default_str();
    std::string key = opt->get_name();
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    std::replace(key.begin(), key.end(), '-', '_');
    bindings_[app].push_back({key, opt, [&var](const json& v) { var = v.get<T>(); }});
    echo_[app].push_back({key, [&var]() { return json(var); }});
    return opt;
  }

  void apply(CLI::App* app, const json& config) {
    for (auto* scope : {app->get_parent(), app}) {
      if (!scope) continue;
      for (auto& b : bindings_[scope]) {
        if (b.option->count() > 0 || !config.contains(b.key)) continue;
        try {
          b.assign(config.at(b.key));
        } catch (const json::exception& e) {
          throw Failure(LGCPS_ERR_INVALID_ARGUMENT, "config key '" + b.key + "': " + e.what());
        }
      }
    }
  }

  json echo(CLI::App* app) {
    json out = json::object();
    for (auto* scope : {app->get_parent(), app}) {
      if (!scope) continue;
      for (auto& e : echo_[scope]) out[e.first] = e.second();
    }
    return out;
  }

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<void(const json&)> assign;
  };
  std::map<CLI::App*, std::vector<Binding>> bindings_;
  std::map<CLI::App*, std::vector<std::pair<std::string, std::function<json()>>>> echo_;
};

class Run {
 public:
  Run(std::string command, const Settings& s, json config)
      : command_(std::move(command)), dir_(s.out), settings_(s), config_(std::move(config)) {
    fs::create_directories(dir_);
    fs::remove(dir_ / ".partial");
  }

  fs::path path(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }

  json& extra() { return extra_; }

  void mark_partial(const std::string& reason) {
    std::ofstream(dir_ / ".partial") << reason << '\n';
  }

  void write_manifest() {
    json m;
    m["command"] = command_;
    m["version"] = lgcps_version();
    m["seed"] = settings_.seed;
    m["workers"] = settings_.workers;
    m["config"] = config_;
    m["outputs"] = outputs_;
    for (auto& [k, v] : extra_.items()) m[k] = v;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["created"] = stamp;
    std::ofstream(dir_ / "manifest.json") << m.dump(2) << '\n';
  }

  const fs::path& dir() const { return dir_; }

 private:
  std::string command_;
  fs::path dir_;
  Settings settings_;
  json config_;
  json extra_ = json::object();
  std::vector<std::string> outputs_;
};

lgcps_window window_of(const Settings& s) {
  if (s.window.size() != 4)
    throw Failure(LGCPS_ERR_INVALID_ARGUMENT, "window needs four values xmin,xmax,ymin,ymax");
  return {s.window[0], s.window[1], s.window[2], s.window[3]};
}

lgcps_params params_of(const Settings& s) { return {s.mu, s.sigma2, s.s, s.gamma, s.R}; }

lgcps_model model_of(const Settings& s) {
  lgcps_model m;
  check(lgcps_model_from_name(s.model.c_str(), &m), "model");
  return m;
}

lgcps_sim_options sim_of(const Settings& s) { return {s.nx, s.ny, s.burnin}; }

lgcps_summary_options summary_of(const Settings& s) {
  lgcps_summary_options o = lgcps_summary_options_default();
  if (s.quadrat_orders.size() > LGCPS_MAX_QUADRAT_ORDERS)
    throw Failure(LGCPS_ERR_INVALID_ARGUMENT, "too many quadrat orders");
  o.n_r = s.n_r;
  o.r_fraction = s.r_fraction;
  o.n_quadrat_orders = static_cast<int>(s.quadrat_orders.size());
  for (std::size_t i = 0; i < s.quadrat_orders.size(); ++i) o.quadrat_orders[i] = s.quadrat_orders[i];
  return o;
}

lgcps_abc_config abc_of(const Settings& s) {
  lgcps_abc_config c = lgcps_abc_config_default();
  c.model = model_of(s);
  c.simulation = sim_of(s);
  c.summary = summary_of(s);
  c.k_pilot = s.k_pilot;
  c.k_abc = s.k_abc;
  c.m = s.m;
  c.quantile = s.quantile;
  c.budget_factor = s.budget_factor;
  c.cv_folds = s.cv_folds;
  c.workers = s.workers;
  return c;
}

void load_prior(const Settings& s, Prior& prior, json& echo) {
  if (fs::is_regular_file(s.prior)) {
    std::ifstream in(s.prior);
    std::stringstream text;
    text << in.rdbuf();
    check(lgcps_prior_from_json(text.str().c_str(), prior.out()), "prior " + s.prior);
  } else {
    check(lgcps_prior_preset(s.prior.c_str(), prior.out()), "prior");
  }
  echo = json::parse(take_string([&] {
    char* t = nullptr;
    check(lgcps_prior_to_json(prior.get(), &t), "prior");
    return t;
  }()));
}

void load_pattern(const Settings& s, Pattern& pattern) {
  if (s.pattern.empty()) throw Failure(LGCPS_ERR_INVALID_ARGUMENT, "--pattern is required");
  check(lgcps_pattern_read_csv(s.pattern.c_str(), pattern.out()), "pattern " + s.pattern);
}

int cmd_simulate(Run& run, const Settings& s) {
  const auto theta = params_of(s);
  const auto sim = sim_of(s);
  Pattern x;
  check(lgcps_simulate(model_of(s), &theta, window_of(s), &sim, s.seed, x.out()), "simulate");
  check(lgcps_pattern_write_csv(x.get(), run.path("pattern.csv").c_str()), "simulate");
  if (model_of(s) != LGCPS_MODEL_STRAUSS)
    check(lgcps_write_field_csv(&theta, window_of(s), &sim, s.seed, run.path("field.csv").c_str()),
          "simulate");
  run.extra()["n_points"] = lgcps_pattern_size(x.get());
  return 0;
}

int cmd_summarize(Run& run, const Settings& s) {
  Pattern x;
  load_pattern(s, x);
  const auto opts = summary_of(s);
  std::size_t d = 0;
  check(lgcps_summary_dimension(&opts, &d), "summarize");
  std::vector<double> T(d);
  int finite = 0;
  check(lgcps_summary_vector(x.get(), &opts, T.data(), d, &finite), "summarize");
  std::ofstream out(run.path("summaries.csv"));
  out << "name,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < d; ++i) {
    char* name = nullptr;
    check(lgcps_summary_name(&opts, i, &name), "summarize");
    out << take_string(name) << ',' << T[i] << '\n';
  }
  run.extra()["finite"] = finite != 0;
  return 0;
}

int cmd_trace(Run& run, const Settings& s) {
  const auto theta = params_of(s);
  const auto sim = sim_of(s);
  check(lgcps_trace_csv(&theta, window_of(s), &sim, s.iters, s.seed, run.path("trace.csv").c_str()),
        "trace");
  return 0;
}

int cmd_pilot(Run& run, const Settings& s) {
  Prior prior;
  load_prior(s, prior, run.extra()["prior"]);
  const auto cfg = abc_of(s);
  Pilot pilot;
  check(lgcps_pilot_run(prior.get(), window_of(s), &cfg, s.seed, pilot.out()), "pilot");
  check(lgcps_pilot_write_csv(pilot.get(), run.path("pilot.csv").c_str()), "pilot");
  std::size_t excluded = 0, failures = 0, sims = 0;
  lgcps_pilot_counts(pilot.get(), &excluded, &failures, &sims);
  run.extra()["exclusions"] = {{"nonfinite", excluded}, {"screen_failures", failures},
                               {"simulations", sims}};
  return 0;
}

int cmd_fit(Run& run, const Settings& s) {
  Pattern x;
  load_pattern(s, x);
  Prior prior;
  load_prior(s, prior, run.extra()["prior"]);
  const auto cfg = abc_of(s);
  Pilot pilot;
  if (!s.pilot.empty()) check(lgcps_pilot_read_csv(s.pilot.c_str(), pilot.out()), "pilot " + s.pilot);
  Posterior post;
  const lgcps_status status = lgcps_abc_fit(x.get(), prior.get(), pilot.get(), &cfg, s.seed, post.out());
  if (status != LGCPS_OK && !(status == LGCPS_ERR_BUDGET_EXHAUSTED && post.get()))
    check(status, "fit");
  check(lgcps_posterior_write_csv(post.get(), run.path("posterior.csv").c_str()), "fit");
  if (lgcps_posterior_size(post.get()) > 0) {
    char* report = nullptr;
    check(lgcps_posterior_report_json(post.get(), &report), "fit");
    std::ofstream(run.path("report.json")) << take_string(report) << '\n';
    check(lgcps_posterior_kde_csv(post.get(), run.path("kde.csv").c_str()), "fit");
  }
  run.extra()["epsilon"] = lgcps_posterior_epsilon(post.get());
  run.extra()["accepted"] = lgcps_posterior_size(post.get());
  run.extra()["attempts"] = lgcps_posterior_attempts(post.get());
  if (status == LGCPS_ERR_BUDGET_EXHAUSTED) {
    run.extra()["shortfall"] = true;
    run.mark_partial("simulation budget exhausted");
    std::cerr << "fit: " << lgcps_last_error() << '\n';
    return 2;
  }
  return 0;
}

int cmd_envelope(Run& run, const Settings& s) {
  Pattern x;
  load_pattern(s, x);
  if (s.posterior.empty()) throw Failure(LGCPS_ERR_INVALID_ARGUMENT, "--posterior is required");
  Posterior post;
  check(lgcps_posterior_read_csv(s.posterior.c_str(), post.out()), "posterior " + s.posterior);
  const auto sim = sim_of(s);
  Envelope env;
  check(lgcps_envelope_run(x.get(), post.get(), model_of(s), &sim, s.n_sims, s.level, s.workers,
                           s.seed, env.out()),
        "envelope");
  check(lgcps_envelope_write_csv(env.get(), 0, run.path("envelope_L.csv").c_str()), "envelope");
  check(lgcps_envelope_write_csv(env.get(), 1, run.path("envelope_J.csv").c_str()), "envelope");
  json result = {{"p_value", lgcps_envelope_p_value(env.get())},
                 {"rejected", lgcps_envelope_rejected(env.get()) != 0},
                 {"level", s.level},
                 {"simulations", lgcps_envelope_simulations(env.get())},
                 {"excluded", lgcps_envelope_excluded(env.get())},
                 {"p_value_L", lgcps_envelope_set_p_value(env.get(), 0)},
                 {"p_value_J", lgcps_envelope_set_p_value(env.get(), 1)}};
  std::ofstream(run.path("envelope.json")) << result.dump(2) << '\n';
  run.extra()["exclusions"] = {{"predictive", lgcps_envelope_excluded(env.get())}};
  return 0;
}

int cmd_choose(Run& run, const Settings& s) {
  Pattern x;
  load_pattern(s, x);
  Prior prior;
  load_prior(s, prior, run.extra()["prior"]);
  lgcps_choice_config cfg = lgcps_choice_config_default();
  cfg.n = s.n_ref;
  cfg.m = s.m;
  cfg.n_trees = s.trees;
  cfg.workers = s.workers;
  cfg.simulation = sim_of(s);
  cfg.summary = summary_of(s);
  Table table;
  check(lgcps_reference_table_build(prior.get(), lgcps_pattern_window(x.get()), &cfg, s.seed,
                                    table.out()),
        "choose");
  Forest forest;
  check(lgcps_forest_train(table.get(), &cfg, s.seed, forest.out()),
        "choose");
  lgcps_choice c;
  check(lgcps_forest_choose(forest.get(), x.get(), nullptr, &c), "choose");
  json result = {{"selected_model", lgcps_model_name(c.selected)},
                 {"vote_fractions",
                  {{lgcps_model_name(LGCPS_MODEL_LGCP_STRAUSS), c.vote_fractions[0]},
                   {lgcps_model_name(LGCPS_MODEL_LGCP), c.vote_fractions[1]},
                   {lgcps_model_name(LGCPS_MODEL_STRAUSS), c.vote_fractions[2]}}},
                 {"posterior_probability", c.posterior_probability},
                 {"oob_error", c.oob_error},
                 {"tie", c.tie != 0},
                 {"n_excluded", c.n_excluded},
                 {"reference_table_size", lgcps_reference_table_size(table.get())}};
  std::ofstream(run.path("choice.json")) << result.dump(2) << '\n';
  run.extra()["exclusions"] = {{"reference_table", c.n_excluded}};
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  std::string config_path;
  CLI::App app{"Likelihood-free inference for log Gaussian Cox and Strauss point processes"};
  app.require_subcommand(1);
  Binder bind;
  app.add_option("--config", config_path, "JSON file with default values; flags take precedence")
      ->check(CLI::ExistingFile);
  bind.add(&app, "--seed", s.seed, "master seed");
  bind.add(&app, "--workers", s.workers, "worker threads");
  bind.add(&app, "--out", s.out, "output directory");

  auto add_sim = [&](CLI::App* c) {
    bind.add(c, "--nx", s.nx, "field grid columns");
    bind.add(c, "--ny", s.ny, "field grid rows");
    bind.add(c, "--burnin", s.burnin, "birth-death steps per simulation");
  };
  auto add_params = [&](CLI::App* c) {
    bind.add(c, "--mu", s.mu, "log-intensity mean");
    bind.add(c, "--sigma2", s.sigma2, "field variance");
    bind.add(c, "--s", s.s, "field correlation scale");
    bind.add(c, "--gamma", s.gamma, "interaction parameter");
    bind.add(c, "--R", s.R, "interaction radius");
    bind.add(c, "--window", s.window, "xmin xmax ymin ymax")->expected(4)->delimiter(',');
  };
  auto add_summary = [&](CLI::App* c) {
    bind.add(c, "--n-r", s.n_r, "number of L grid points");
    bind.add(c, "--r-fraction", s.r_fraction, "L grid upper end as a fraction of the shorter side");
    bind.add(c, "--quadrat-orders", s.quadrat_orders, "quadrat grid orders")->delimiter(',');
  };
  auto add_abc = [&](CLI::App* c) {
    bind.add(c, "--model", s.model, "lgcp-strauss, lgcp or strauss");
    bind.add(c, "--prior", s.prior, "preset name (P1, P2, P3, oak) or prior JSON file");
    bind.add(c, "--k-pilot", s.k_pilot, "pilot simulations");
    bind.add(c, "--k-abc", s.k_abc, "accepted posterior draws");
    bind.add(c, "--m", s.m, "minimum number of points (screen n > m)");
    bind.add(c, "--quantile", s.quantile, "pilot distance quantile giving the tolerance");
    bind.add(c, "--budget-factor", s.budget_factor, "simulation budget per accepted draw");
    bind.add(c, "--cv-folds", s.cv_folds, "cross-validation folds");
  };

  auto* simulate = app.add_subcommand("simulate", "simulate a pattern (and its field)");
  bind.add(simulate, "--model", s.model, "lgcp-strauss, lgcp or strauss");
  add_params(simulate);
  add_sim(simulate);

  auto* summarize = app.add_subcommand("summarize", "summary vector of a pattern");
  bind.add(summarize, "--pattern", s.pattern, "pattern CSV");
  add_summary(summarize);

  auto* trace = app.add_subcommand("trace", "birth-death chain traces from two initial states");
  add_params(trace);
  add_sim(trace);
  bind.add(trace, "--iters", s.iters, "chain length");

  auto* pilot = app.add_subcommand("pilot", "pilot simulations from the prior");
  bind.add(pilot, "--window", s.window, "xmin xmax ymin ymax")->expected(4)->delimiter(',');
  add_abc(pilot);
  add_sim(pilot);
  add_summary(pilot);

  auto* fit = app.add_subcommand("fit", "ABC posterior for an observed pattern");
  bind.add(fit, "--pattern", s.pattern, "observed pattern CSV");
  bind.add(fit, "--pilot", s.pilot, "existing pilot CSV (skips the pilot stage)");
  add_abc(fit);
  add_sim(fit);
  add_summary(fit);

  auto* envelope = app.add_subcommand("envelope", "posterior predictive global envelope test");
  bind.add(envelope, "--pattern", s.pattern, "observed pattern CSV");
  bind.add(envelope, "--posterior", s.posterior, "posterior CSV");
  bind.add(envelope, "--model", s.model, "lgcp-strauss, lgcp or strauss");
  bind.add(envelope, "--n-sims", s.n_sims, "predictive simulations (0: one per draw)");
  bind.add(envelope, "--level", s.level, "envelope level");
  add_sim(envelope);

  auto* choose = app.add_subcommand("choose", "random-forest model choice");
  bind.add(choose, "--pattern", s.pattern, "observed pattern CSV");
  bind.add(choose, "--prior", s.prior, "preset name (P1, P2, P3, oak) or prior JSON file");
  bind.add(choose, "--n-ref", s.n_ref, "reference table size");
  bind.add(choose, "--trees", s.trees, "trees per forest");
  bind.add(choose, "--m", s.m, "minimum number of points (screen n > m)");
  add_sim(choose);
  add_summary(choose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  std::unique_ptr<Run> run;
  try {
    json config = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        config = json::parse(in);
      } catch (const json::exception& e) {
        throw Failure(LGCPS_ERR_INVALID_ARGUMENT, "config " + config_path + ": " + e.what());
      }
      if (!config.is_object())
        throw Failure(LGCPS_ERR_INVALID_ARGUMENT, "config must be a JSON object");
    }
    bind.apply(sub, config);
    run = std::make_unique<Run>(name, s, bind.echo(sub));
    int code = 0;
    if (name == "simulate") code = cmd_simulate(*run, s);
    else if (name == "summarize") code = cmd_summarize(*run, s);
    else if (name == "trace") code = cmd_trace(*run, s);
    else if (name == "pilot") code = cmd_pilot(*run, s);
    else if (name == "fit") code = cmd_fit(*run, s);
    else if (name == "envelope") code = cmd_envelope(*run, s);
    else if (name == "choose") code = cmd_choose(*run, s);
    run->write_manifest();
    return code;
  } catch (const Failure& e) {
    std::cerr << name << ": " << e.what() << '\n';
    if (run) {
      run->mark_partial(e.what());
      run->extra()["error"] = e.what();
      run->write_manifest();
    }
    return e.status == LGCPS_ERR_BUDGET_EXHAUSTED ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    if (run) run->mark_partial(e.what());
    return 1;
  }
}
