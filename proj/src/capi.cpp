#include "lgcps/lgcps.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lgcps/abc.hpp"
#include "lgcps/envelopes.hpp"
#include "lgcps/error.hpp"
#include "lgcps/io.hpp"
#include "lgcps/modelchoice.hpp"
#include "lgcps/samplers.hpp"
#include "lgcps/summaries.hpp"

using json = nlohmann::ordered_json;

struct lgcps_pattern {
  lgcps::PointPattern pattern;
};

struct lgcps_prior {
  lgcps::PriorSpec prior;
};

struct lgcps_pilot {
  lgcps::PilotSet pilot;
  std::vector<std::string> names;
};

struct lgcps_posterior {
  std::vector<lgcps::ModelParams> draws;
  std::optional<lgcps::Model> model;
  std::optional<lgcps::AbcResult> result;
  std::vector<std::string> names;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  std::size_t attempts = 0;
  bool shortfall = false;
};

struct lgcps_envelope {
  lgcps::PredictiveTest test;
};

struct lgcps_reference_table {
  lgcps::ReferenceTable table;
  lgcps::SummaryOptions summary;
};

struct lgcps_forest {
  lgcps::ModelChoiceForest forest;
  lgcps::SummaryOptions summary;
};

namespace {

thread_local std::string g_last_error;

template <class F>
lgcps_status guarded(F&& f) {
  try {
    f();
    return LGCPS_OK;
  } catch (const lgcps::Error& e) {
    g_last_error = e.what();
    return static_cast<lgcps_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LGCPS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LGCPS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LGCPS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw lgcps::InvalidArgument(std::string(what) + " is null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lgcps::Window to_window(const lgcps_window& w) {
  return lgcps::Window(w.xmin, w.xmax, w.ymin, w.ymax);
}

lgcps_window from_window(const lgcps::Window& w) {
  return {w.xmin(), w.xmax(), w.ymin(), w.ymax()};
}

lgcps::ModelParams to_params(const lgcps_params& p) {
  return {p.mu, p.sigma2, p.s, p.gamma, p.R};
}

lgcps_params from_params(const lgcps::ModelParams& p) {
  return {p.mu, p.sigma2, p.s, p.gamma, p.R};
}

lgcps::Model to_model(lgcps_model m) {
  switch (m) {
    case LGCPS_MODEL_LGCP_STRAUSS: return lgcps::Model::LgcpStrauss;
    case LGCPS_MODEL_LGCP: return lgcps::Model::Lgcp;
    case LGCPS_MODEL_STRAUSS: return lgcps::Model::Strauss;
  }
  throw lgcps::InvalidArgument("unknown model code " + std::to_string(static_cast<int>(m)));
}

lgcps::SimulationOptions to_sim(const lgcps_sim_options* o) {
  lgcps::SimulationOptions out;
  if (o) {
    if (o->nx < 1 || o->ny < 1) throw lgcps::InvalidArgument("field grid must have at least one cell");
    out.nx = o->nx;
    out.ny = o->ny;
    out.burnin = o->burnin;
  }
  return out;
}

lgcps::SummaryOptions to_summary(const lgcps_summary_options* o) {
  lgcps::SummaryOptions out;
  if (o) {
    if (o->n_quadrat_orders < 0 || o->n_quadrat_orders > LGCPS_MAX_QUADRAT_ORDERS)
      throw lgcps::InvalidArgument("too many quadrat orders");
    out.n_r = o->n_r;
    out.r_fraction = o->r_fraction;
    out.quadrat_orders.assign(o->quadrat_orders, o->quadrat_orders + o->n_quadrat_orders);
    out.extreme_r_max = o->extreme_r_max;
    out.extreme_n_r = o->extreme_n_r;
  }
  out.validate();
  return out;
}

lgcps::AbcConfig to_abc(const lgcps_abc_config* c, const lgcps::PriorSpec& prior) {
  require(c, "config");
  lgcps::AbcConfig out;
  out.model = to_model(c->model);
  out.prior = prior;
  out.simulation = to_sim(&c->simulation);
  out.summary = to_summary(&c->summary);
  out.k_pilot = c->k_pilot;
  out.k_abc = c->k_abc;
  out.m = c->m;
  out.quantile = c->quantile;
  out.budget_factor = c->budget_factor;
  out.cv.n_folds = c->cv_folds;
  out.cv.n_lambda = c->n_lambda;
  out.cv.lambda_min_ratio = c->lambda_min_ratio;
  out.cv.workers = c->workers;
  out.workers = c->workers;
  return out;
}

std::vector<double> r_grid_for(const lgcps::PointPattern& x, lgcps_curve_kind kind, int n_r) {
  if (kind == LGCPS_CURVE_J) return lgcps::regular_r_grid(lgcps::default_j_rmax(x), n_r);
  return lgcps::regular_r_grid(0.2 * x.window().shorter_side(), n_r);
}

lgcps::Curve curve_of(const lgcps::PointPattern& x, lgcps_curve_kind kind,
                      const std::vector<double>& r) {
  switch (kind) {
    case LGCPS_CURVE_K: return lgcps::k_function(x, r);
    case LGCPS_CURVE_L: return lgcps::l_function(x, r);
    case LGCPS_CURVE_F: return lgcps::empty_space_F(x, r);
    case LGCPS_CURVE_G: return lgcps::nearest_neighbour_G(x, r);
    case LGCPS_CURVE_J: return lgcps::j_function(x, r);
  }
  throw lgcps::InvalidArgument("unknown curve kind");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw lgcps::IoError(where + ": not a number: '" + s + "'");
  return v;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

extern "C" {

const char* lgcps_version(void) { return "0.1.0"; }

const char* lgcps_last_error(void) { return g_last_error.c_str(); }

void lgcps_string_free(char* s) { std::free(s); }

const char* lgcps_model_name(lgcps_model model) {
  switch (model) {
    case LGCPS_MODEL_LGCP_STRAUSS: return "lgcp-strauss";
    case LGCPS_MODEL_LGCP: return "lgcp";
    case LGCPS_MODEL_STRAUSS: return "strauss";
  }
  return "unknown";
}

lgcps_status lgcps_model_from_name(const char* name, lgcps_model* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<lgcps_model>(lgcps::model_from_name(name));
  });
}

uint64_t lgcps_derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
  return lgcps::derive_seed(master, stream, index);
}

lgcps_status lgcps_pattern_create(lgcps_window window, const double* xy, size_t n,
                                  lgcps_pattern** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(xy, "xy");
    std::vector<lgcps::Point> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = {xy[2 * i], xy[2 * i + 1]};
    *out = new lgcps_pattern{lgcps::PointPattern(to_window(window), std::move(pts))};
  });
}

lgcps_status lgcps_pattern_read_csv(const char* path, lgcps_pattern** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lgcps_pattern{lgcps::read_pattern_csv(path)};
  });
}

lgcps_status lgcps_pattern_write_csv(const lgcps_pattern* pattern, const char* path) {
  return guarded([&] {
    require(pattern, "pattern");
    require(path, "path");
    lgcps::write_pattern_csv(pattern->pattern, path);
  });
}

void lgcps_pattern_free(lgcps_pattern* pattern) { delete pattern; }

size_t lgcps_pattern_size(const lgcps_pattern* pattern) {
  return pattern ? pattern->pattern.size() : 0;
}

lgcps_window lgcps_pattern_window(const lgcps_pattern* pattern) {
  if (!pattern) return {0, 0, 0, 0};
  return from_window(pattern->pattern.window());
}

lgcps_status lgcps_pattern_points(const lgcps_pattern* pattern, double* xy) {
  return guarded([&] {
    require(pattern, "pattern");
    if (pattern->pattern.empty()) return;
    require(xy, "xy");
    const auto pts = pattern->pattern.points();
    for (size_t i = 0; i < pts.size(); ++i) {
      xy[2 * i] = pts[i].x;
      xy[2 * i + 1] = pts[i].y;
    }
  });
}

lgcps_status lgcps_close_pair_count(const lgcps_pattern* pattern, double R, size_t* out) {
  return guarded([&] {
    require(pattern, "pattern");
    require(out, "out");
    if (!(R >= 0.0)) throw lgcps::InvalidArgument("interaction radius must be non-negative");
    *out = lgcps::close_pair_count(pattern->pattern, R);
  });
}

lgcps_status lgcps_prior_preset(const char* name, lgcps_prior** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = new lgcps_prior{lgcps::prior_preset(name)};
  });
}

lgcps_status lgcps_prior_from_json(const char* text, lgcps_prior** out) {
  return guarded([&] {
    require(text, "json");
    require(out, "out");
    *out = new lgcps_prior{lgcps::parse_prior_json(text)};
  });
}

lgcps_status lgcps_prior_to_json(const lgcps_prior* prior, char** out) {
  return guarded([&] {
    require(prior, "prior");
    require(out, "out");
    *out = copy_string(lgcps::prior_to_json(prior->prior));
  });
}

lgcps_status lgcps_prior_sample(const lgcps_prior* prior, uint64_t seed, lgcps_params* out) {
  return guarded([&] {
    require(prior, "prior");
    require(out, "out");
    *out = from_params(lgcps::sample_prior(prior->prior, seed));
  });
}

void lgcps_prior_free(lgcps_prior* prior) { delete prior; }

lgcps_sim_options lgcps_sim_options_default(void) {
  const lgcps::SimulationOptions d;
  return {d.nx, d.ny, d.burnin};
}

lgcps_status lgcps_simulate(lgcps_model model, const lgcps_params* theta, lgcps_window window,
                            const lgcps_sim_options* options, uint64_t seed, lgcps_pattern** out) {
  return guarded([&] {
    require(theta, "theta");
    require(out, "out");
    *out = new lgcps_pattern{
        lgcps::simulate(to_model(model), to_params(*theta), to_window(window), to_sim(options), seed)};
  });
}

lgcps_status lgcps_write_field_csv(const lgcps_params* theta, lgcps_window window,
                                   const lgcps_sim_options* options, uint64_t seed,
                                   const char* path) {
  return guarded([&] {
    require(theta, "theta");
    require(path, "path");
    const auto field =
        lgcps::simulation_field(to_params(*theta), to_window(window), to_sim(options), seed);
    lgcps::write_field_csv(field, path);
  });
}

lgcps_status lgcps_trace_csv(const lgcps_params* theta, lgcps_window window,
                             const lgcps_sim_options* options, uint64_t n_iters, uint64_t seed,
                             const char* path) {
  return guarded([&] {
    require(theta, "theta");
    require(path, "path");
    const auto pair =
        lgcps::trace_chains(to_params(*theta), to_window(window), to_sim(options), n_iters, seed);
    std::ofstream out(path);
    if (!out) throw lgcps::IoError(std::string("cannot write ") + path);
    out << "iter,n,sR,init_label\n";
    for (const auto& t : pair.from_empty) out << t.iter << ',' << t.n << ',' << t.sR << ",empty\n";
    for (const auto& t : pair.from_poisson)
      out << t.iter << ',' << t.n << ',' << t.sR << ",poisson\n";
    if (!out) throw lgcps::IoError(std::string("write failed: ") + path);
  });
}

lgcps_summary_options lgcps_summary_options_default(void) {
  const lgcps::SummaryOptions d;
  lgcps_summary_options out{};
  out.n_r = d.n_r;
  out.r_fraction = d.r_fraction;
  out.n_quadrat_orders = static_cast<int>(d.quadrat_orders.size());
  for (size_t i = 0; i < d.quadrat_orders.size(); ++i) out.quadrat_orders[i] = d.quadrat_orders[i];
  out.extreme_r_max = d.extreme_r_max;
  out.extreme_n_r = d.extreme_n_r;
  return out;
}

lgcps_status lgcps_summary_dimension(const lgcps_summary_options* options, size_t* out) {
  return guarded([&] {
    require(out, "out");
    *out = to_summary(options).dimension();
  });
}

lgcps_status lgcps_summary_name(const lgcps_summary_options* options, size_t index, char** out) {
  return guarded([&] {
    require(out, "out");
    const auto names = lgcps::summary_names(to_summary(options));
    if (index >= names.size()) throw lgcps::InvalidArgument("summary index out of range");
    *out = copy_string(names[index]);
  });
}

lgcps_status lgcps_summary_vector(const lgcps_pattern* pattern,
                                  const lgcps_summary_options* options, double* out,
                                  size_t capacity, int* finite) {
  return guarded([&] {
    require(pattern, "pattern");
    require(out, "out");
    const auto opts = to_summary(options);
    if (capacity < opts.dimension()) throw lgcps::InvalidArgument("output buffer too small");
    const auto T = lgcps::summary_vector(pattern->pattern, opts);
    std::copy(T.values.begin(), T.values.end(), out);
    if (finite) *finite = T.finite ? 1 : 0;
  });
}

lgcps_status lgcps_default_r_grid(const lgcps_pattern* pattern, lgcps_curve_kind kind, size_t n_r,
                                  double* r_out) {
  return guarded([&] {
    require(pattern, "pattern");
    require(r_out, "r_out");
    const auto r = r_grid_for(pattern->pattern, kind, static_cast<int>(n_r));
    std::copy(r.begin(), r.end(), r_out);
  });
}

lgcps_status lgcps_curve(const lgcps_pattern* pattern, lgcps_curve_kind kind, const double* r,
                         size_t n_r, double* values, int* defined) {
  return guarded([&] {
    require(pattern, "pattern");
    require(r, "r");
    require(values, "values");
    const auto c = curve_of(pattern->pattern, kind, std::vector<double>(r, r + n_r));
    for (size_t k = 0; k < n_r; ++k) {
      values[k] = c.values[k];
      if (defined) defined[k] = c.defined[k] ? 1 : 0;
    }
  });
}

lgcps_abc_config lgcps_abc_config_default(void) {
  const lgcps::AbcConfig d;
  lgcps_abc_config out{};
  out.model = static_cast<lgcps_model>(d.model);
  out.simulation = lgcps_sim_options_default();
  out.summary = lgcps_summary_options_default();
  out.k_pilot = d.k_pilot;
  out.k_abc = d.k_abc;
  out.m = d.m;
  out.quantile = d.quantile;
  out.budget_factor = d.budget_factor;
  out.cv_folds = d.cv.n_folds;
  out.n_lambda = d.cv.n_lambda;
  out.lambda_min_ratio = d.cv.lambda_min_ratio;
  out.workers = d.workers;
  return out;
}

lgcps_status lgcps_pilot_run(const lgcps_prior* prior, lgcps_window window,
                             const lgcps_abc_config* config, uint64_t seed, lgcps_pilot** out) {
  return guarded([&] {
    require(prior, "prior");
    require(out, "out");
    const auto cfg = to_abc(config, prior->prior);
    lgcps::PilotOptions po;
    po.k_pilot = cfg.k_pilot;
    po.m = cfg.m;
    po.summary = cfg.summary;
    po.workers = cfg.workers;
    const auto sim = lgcps::make_simulator(cfg.model, to_window(window), cfg.simulation);
    auto pilot = lgcps::run_pilot(cfg.model, cfg.prior, sim, po, seed);
    *out = new lgcps_pilot{std::move(pilot), lgcps::summary_names(cfg.summary)};
  });
}

lgcps_status lgcps_pilot_write_csv(const lgcps_pilot* pilot, const char* path) {
  return guarded([&] {
    require(pilot, "pilot");
    require(path, "path");
    std::ofstream out(path);
    if (!out) throw lgcps::IoError(std::string("cannot write ") + path);
    const auto& p = pilot->pilot;
    out << "# excluded " << p.n_excluded << '\n';
    out << "# screen_failures " << p.n_screen_failures << '\n';
    out << "# simulations " << p.n_simulations << '\n';
    out << "mu,sigma2,s,gamma,R";
    for (const auto& n : pilot->names) out << ',' << n;
    out << '\n';
    for (size_t i = 0; i < p.size(); ++i) {
      const auto a = p.params[i].to_array();
      for (size_t j = 0; j < 5; ++j) out << (j ? "," : "") << lgcps::format_double(a[j]);
      for (double v : p.summaries[i].values) out << ',' << lgcps::format_double(v);
      out << '\n';
    }
    if (!out) throw lgcps::IoError(std::string("write failed: ") + path);
  });
}

lgcps_status lgcps_pilot_read_csv(const char* path, lgcps_pilot** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::ifstream in(path);
    if (!in) throw lgcps::IoError(std::string("cannot open ") + path);
    lgcps::PilotSet pilot;
    std::vector<std::string> names;
    bool have_header = false;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::string where = std::string(path) + ":" + std::to_string(lineno);
      if (line.front() == '#') {
        std::istringstream ss(line.substr(1));
        std::string key;
        size_t value = 0;
        if (ss >> key >> value) {
          if (key == "excluded") pilot.n_excluded = value;
          else if (key == "screen_failures") pilot.n_screen_failures = value;
          else if (key == "simulations") pilot.n_simulations = value;
        }
        continue;
      }
      const auto fields = split_csv(line);
      if (!have_header) {
        if (fields.size() < 6 || fields[0] != "mu" || fields[4] != "R")
          throw lgcps::IoError(where + ": expected header mu,sigma2,s,gamma,R,<summaries>");
        names.assign(fields.begin() + 5, fields.end());
        have_header = true;
        continue;
      }
      if (fields.size() != names.size() + 5)
        throw lgcps::IoError(where + ": expected " + std::to_string(names.size() + 5) + " fields");
      std::array<double, 5> a{};
      for (size_t j = 0; j < 5; ++j) a[j] = parse_number(fields[j], where);
      lgcps::SummaryVector T;
      T.values.reserve(names.size());
      T.finite = true;
      for (size_t j = 5; j < fields.size(); ++j) {
        T.values.push_back(parse_number(fields[j], where));
        T.finite = T.finite && std::isfinite(T.values.back());
      }
      if (!T.finite) throw lgcps::IoError(where + ": pilot summaries must be finite");
      pilot.params.push_back(lgcps::ModelParams::from_array(a));
      pilot.summaries.push_back(std::move(T));
    }
    if (!have_header) throw lgcps::IoError(std::string(path) + ": missing header");
    *out = new lgcps_pilot{std::move(pilot), std::move(names)};
  });
}

size_t lgcps_pilot_size(const lgcps_pilot* pilot) { return pilot ? pilot->pilot.size() : 0; }

void lgcps_pilot_counts(const lgcps_pilot* pilot, size_t* n_excluded, size_t* n_screen_failures,
                        size_t* n_simulations) {
  if (!pilot) return;
  if (n_excluded) *n_excluded = pilot->pilot.n_excluded;
  if (n_screen_failures) *n_screen_failures = pilot->pilot.n_screen_failures;
  if (n_simulations) *n_simulations = pilot->pilot.n_simulations;
}

void lgcps_pilot_free(lgcps_pilot* pilot) { delete pilot; }

lgcps_status lgcps_abc_fit(const lgcps_pattern* observed, const lgcps_prior* prior,
                           const lgcps_pilot* pilot, const lgcps_abc_config* config, uint64_t seed,
                           lgcps_posterior** out) {
  bool shortfall = false;
  const lgcps_status status = guarded([&] {
    require(observed, "observed");
    require(prior, "prior");
    require(out, "out");
    *out = nullptr;
    const auto cfg = to_abc(config, prior->prior);
    auto names = lgcps::summary_names(cfg.summary);
    lgcps::AbcResult result;
    if (pilot) {
      if (pilot->names != names)
        throw lgcps::InvalidArgument("pilot summaries do not match the configured summary options");
      result = lgcps::run_abc_from_pilot(observed->pattern, pilot->pilot, cfg, seed);
    } else {
      result = lgcps::run_abc(observed->pattern, cfg, seed);
    }
    auto* post = new lgcps_posterior;
    post->draws = result.posterior.draws;
    post->model = cfg.model;
    post->epsilon = result.posterior.epsilon;
    post->attempts = result.posterior.attempts;
    post->shortfall = result.posterior.shortfall;
    post->names = std::move(names);
    post->result = std::move(result);
    *out = post;
    shortfall = post->shortfall;
  });
  if (status == LGCPS_OK && shortfall) {
    g_last_error = "simulation budget exhausted before the requested posterior size was reached";
    return LGCPS_ERR_BUDGET_EXHAUSTED;
  }
  return status;
}

size_t lgcps_posterior_size(const lgcps_posterior* posterior) {
  return posterior ? posterior->draws.size() : 0;
}

lgcps_status lgcps_posterior_draw(const lgcps_posterior* posterior, size_t i, lgcps_params* out) {
  return guarded([&] {
    require(posterior, "posterior");
    require(out, "out");
    if (i >= posterior->draws.size()) throw lgcps::InvalidArgument("draw index out of range");
    *out = from_params(posterior->draws[i]);
  });
}

double lgcps_posterior_epsilon(const lgcps_posterior* posterior) {
  return posterior ? posterior->epsilon : std::numeric_limits<double>::quiet_NaN();
}

size_t lgcps_posterior_attempts(const lgcps_posterior* posterior) {
  return posterior ? posterior->attempts : 0;
}

int lgcps_posterior_shortfall(const lgcps_posterior* posterior) {
  return posterior && posterior->shortfall ? 1 : 0;
}

lgcps_status lgcps_posterior_write_csv(const lgcps_posterior* posterior, const char* path) {
  return guarded([&] {
    require(posterior, "posterior");
    require(path, "path");
    lgcps::write_params_csv(posterior->draws, path);
  });
}

lgcps_status lgcps_posterior_read_csv(const char* path, lgcps_posterior** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto* post = new lgcps_posterior;
    try {
      post->draws = lgcps::read_params_csv(path);
    } catch (...) {
      delete post;
      throw;
    }
    *out = post;
  });
}

lgcps_status lgcps_posterior_report_json(const lgcps_posterior* posterior, char** out) {
  return guarded([&] {
    require(posterior, "posterior");
    require(out, "out");
    if (posterior->draws.empty()) throw lgcps::InvalidArgument("posterior has no draws");
    std::vector<size_t> params = {0, 1, 2, 3, 4};
    if (posterior->model) params = lgcps::free_parameters(*posterior->model);
    const auto summary = lgcps::posterior_summary(posterior->draws);
    json report;
    if (posterior->model) report["model"] = std::string(lgcps::model_name(*posterior->model));
    report["n_draws"] = posterior->draws.size();
    report["epsilon"] = number_or_null(posterior->epsilon);
    json marginals = json::object();
    for (size_t j : params) {
      const auto& s = summary[j];
      marginals[std::string(lgcps::kParamNames[j])] = {
          {"mean", s.mean},   {"median", s.median}, {"mode", s.mode}, {"q025", s.q025},
          {"q25", s.q25},     {"q75", s.q75},       {"q975", s.q975}};
    }
    report["marginals"] = marginals;
    if (posterior->result) {
      const auto& r = *posterior->result;
      report["attempts"] = r.posterior.attempts;
      report["screen_failures"] = r.posterior.screen_failures;
      report["nonfinite"] = r.posterior.nonfinite;
      report["shortfall"] = r.posterior.shortfall;
      report["pilot"] = {{"size", r.pilot.size()},
                         {"excluded", r.pilot.n_excluded},
                         {"screen_failures", r.pilot.n_screen_failures},
                         {"simulations", r.pilot.n_simulations}};
      json projections = json::object();
      for (size_t j : params) {
        const auto& pm = r.projections.models[j];
        if (!pm) continue;
        json coefs = json::object();
        for (size_t k : pm->support)
          coefs[posterior->names.at(k)] = pm->standardized_coef[static_cast<Eigen::Index>(k)];
        projections[std::string(lgcps::kParamNames[j])] = {
            {"lambda", pm->lambda},
            {"intercept", pm->intercept},
            {"fitted_variance", pm->fitted_variance},
            {"lasso_converged", pm->lasso_converged},
            {"standardized_coef", coefs}};
      }
      report["projections"] = projections;
    }
    *out = copy_string(report.dump(2));
  });
}

lgcps_status lgcps_posterior_kde_csv(const lgcps_posterior* posterior, const char* path) {
  return guarded([&] {
    require(posterior, "posterior");
    require(path, "path");
    if (posterior->draws.empty()) throw lgcps::InvalidArgument("posterior has no draws");
    std::vector<size_t> params = {0, 1, 2, 3, 4};
    if (posterior->model) params = lgcps::free_parameters(*posterior->model);
    std::ofstream out(path);
    if (!out) throw lgcps::IoError(std::string("cannot write ") + path);
    out << "param,x,density\n";
    std::vector<double> v(posterior->draws.size());
    for (size_t j : params) {
      for (size_t i = 0; i < v.size(); ++i) v[i] = posterior->draws[i][j];
      const auto kde = lgcps::kde_1d(v);
      if (kde.point_mass) continue;
      for (size_t g = 0; g < kde.x.size(); ++g)
        out << lgcps::kParamNames[j] << ',' << lgcps::format_double(kde.x[g]) << ','
            << lgcps::format_double(kde.density[g]) << '\n';
    }
    if (!out) throw lgcps::IoError(std::string("write failed: ") + path);
  });
}

void lgcps_posterior_free(lgcps_posterior* posterior) { delete posterior; }

lgcps_status lgcps_envelope_run(const lgcps_pattern* observed, const lgcps_posterior* posterior,
                                lgcps_model model, const lgcps_sim_options* options, size_t n_sims,
                                double level, int workers, uint64_t seed, lgcps_envelope** out) {
  return guarded([&] {
    require(observed, "observed");
    require(posterior, "posterior");
    require(out, "out");
    lgcps::PredictiveOptions po;
    po.n_sims = n_sims;
    po.workers = workers;
    *out = new lgcps_envelope{lgcps::posterior_predictive_test(
        observed->pattern, posterior->draws, to_model(model), to_sim(options), po, level, seed)};
  });
}

double lgcps_envelope_p_value(const lgcps_envelope* envelope) {
  return envelope ? envelope->test.result.p_value : std::numeric_limits<double>::quiet_NaN();
}

int lgcps_envelope_rejected(const lgcps_envelope* envelope) {
  return envelope && envelope->test.result.rejected ? 1 : 0;
}

size_t lgcps_envelope_excluded(const lgcps_envelope* envelope) {
  return envelope ? envelope->test.n_excluded : 0;
}

size_t lgcps_envelope_simulations(const lgcps_envelope* envelope) {
  return envelope ? envelope->test.l_set.s() : 0;
}

double lgcps_envelope_set_p_value(const lgcps_envelope* envelope, int which) {
  if (!envelope || which < 0 || which > 1) return std::numeric_limits<double>::quiet_NaN();
  return envelope->test.result.per_set[static_cast<size_t>(which)].p_value;
}

lgcps_status lgcps_envelope_write_csv(const lgcps_envelope* envelope, int which, const char* path) {
  return guarded([&] {
    require(envelope, "envelope");
    require(path, "path");
    if (which < 0 || which > 1) throw lgcps::InvalidArgument("envelope set must be 0 (L) or 1 (J)");
    const auto& e = envelope->test.result.per_set[static_cast<size_t>(which)];
    std::ofstream out(path);
    if (!out) throw lgcps::IoError(std::string("cannot write ") + path);
    out << "r,lo,hi,data,mean,defined\n";
    for (size_t k = 0; k < e.r.size(); ++k)
      out << lgcps::format_double(e.r[k]) << ',' << lgcps::format_double(e.lower[k]) << ','
          << lgcps::format_double(e.upper[k]) << ',' << lgcps::format_double(e.observed[k]) << ','
          << lgcps::format_double(e.mean[k]) << ',' << (e.mask[k] ? 1 : 0) << '\n';
    if (!out) throw lgcps::IoError(std::string("write failed: ") + path);
  });
}

void lgcps_envelope_free(lgcps_envelope* envelope) { delete envelope; }

lgcps_status lgcps_global_envelope_test(const double* curves, size_t s, size_t n_r, double level,
                                        double* p_value, int* rejected, double* lower,
                                        double* upper) {
  return guarded([&] {
    require(curves, "curves");
    lgcps::CurveSet set;
    set.r.resize(n_r);
    for (size_t k = 0; k < n_r; ++k) set.r[k] = static_cast<double>(k);
    set.observed.assign(curves, curves + n_r);
    for (size_t i = 1; i <= s; ++i)
      set.simulated.emplace_back(curves + i * n_r, curves + (i + 1) * n_r);
    set.mask.assign(n_r, true);
    const auto res = lgcps::global_envelope(set, level);
    if (p_value) *p_value = res.p_value;
    if (rejected) *rejected = res.rejected ? 1 : 0;
    if (lower) std::copy(res.lower.begin(), res.lower.end(), lower);
    if (upper) std::copy(res.upper.begin(), res.upper.end(), upper);
  });
}

lgcps_choice_config lgcps_choice_config_default(void) {
  const lgcps::ReferenceTableOptions rt;
  const lgcps::ForestOptions fo;
  lgcps_choice_config out{};
  out.n = rt.n;
  out.m = rt.m;
  out.n_trees = fo.n_trees;
  out.workers = 1;
  out.simulation = lgcps_sim_options_default();
  out.summary = lgcps_summary_options_default();
  return out;
}

lgcps_status lgcps_reference_table_build(const lgcps_prior* prior, lgcps_window window,
                                         const lgcps_choice_config* config, uint64_t seed,
                                         lgcps_reference_table** out) {
  return guarded([&] {
    require(prior, "prior");
    require(config, "config");
    require(out, "out");
    lgcps::ReferenceTableOptions o;
    o.n = config->n;
    o.m = config->m;
    o.simulation = to_sim(&config->simulation);
    o.summary = to_summary(&config->summary);
    o.workers = config->workers;
    *out = new lgcps_reference_table{
        lgcps::build_reference_table(prior->prior, to_window(window), o, seed), o.summary};
  });
}

size_t lgcps_reference_table_size(const lgcps_reference_table* table) {
  return table ? table->table.size() : 0;
}

void lgcps_reference_table_free(lgcps_reference_table* table) { delete table; }

lgcps_status lgcps_forest_train(const lgcps_reference_table* table,
                                const lgcps_choice_config* config, uint64_t seed,
                                lgcps_forest** out) {
  return guarded([&] {
    require(table, "table");
    require(config, "config");
    require(out, "out");
    lgcps::ForestOptions fo;
    fo.n_trees = config->n_trees;
    fo.workers = config->workers;
    *out = new lgcps_forest{lgcps::train_forest(table->table, fo, seed), table->summary};
  });
}

lgcps_status lgcps_forest_choose(const lgcps_forest* forest, const lgcps_pattern* observed,
                                 const lgcps_summary_options* summary, lgcps_choice* out) {
  return guarded([&] {
    require(forest, "forest");
    require(observed, "observed");
    require(out, "out");
    const auto opts = summary ? to_summary(summary) : forest->summary;
    const auto T = lgcps::summary_vector(observed->pattern, opts);
    const auto c = lgcps::choose_model(forest->forest, T);
    out->selected = static_cast<lgcps_model>(c.selected);
    for (int k = 0; k < 3; ++k) out->vote_fractions[k] = c.vote_fractions[static_cast<size_t>(k)];
    out->posterior_probability = c.posterior_probability;
    out->oob_error = c.oob_error;
    out->tie = c.tie ? 1 : 0;
    out->n_excluded = c.n_excluded;
  });
}

void lgcps_forest_free(lgcps_forest* forest) { delete forest; }

}  // extern "C"
