#include "commands.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "config.h"
#include "fbstore/covprobe.h"
#include "fbstore/horizon.h"
#include "fbstore/io.h"
#include "fbstore/metrics.h"
#include "fbstore/rate.h"
#include "fbstore/srd.h"
#include "fbstore/storage.h"

namespace fbstore::cli {

namespace {

constexpr int kExitSolver = 2;
constexpr int kExitFit = 3;

struct Common {
  std::string config;
  std::string out;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("--config", c.config, "Config file (JSON object or key = value lines)");
  cmd.add_option("--out", c.out, "Output directory (default: $FBSTORE_OUTPUT_DIR or fbstore-out)");
}

double required(const std::optional<double>& v, const char* name) {
  if (!v) throw CLI::ValidationError(std::string("--") + name, "is required");
  return *v;
}

std::string join_path(const std::string& dir, const std::string& file) { return dir + "/" + file; }

Json opt_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

// ---------------------------------------------------------------- rate

struct RateArgs {
  Common common;
  std::optional<double> h;
  std::size_t n = 256;
  double tol = 1e-8;
  std::string set = "B";
  double delta = 0.0;
  double eps = 0.0;
  double horizon = 3.0;
  std::string sweep_delta;
  bool compare_infima = false;
  bool phi = false;
};

Json rate_config(const RateArgs& a, const std::string& out) {
  Json c;
  c["h"] = opt_number(a.h);
  c["n"] = a.n;
  c["tol"] = a.tol;
  c["set"] = a.set;
  c["delta"] = a.delta;
  c["eps"] = a.eps;
  c["horizon"] = a.horizon;
  c["sweep_delta"] = a.sweep_delta;
  c["compare_infima"] = a.compare_infima;
  c["phi"] = a.phi;
  c["out"] = out;
  return c;
}

ConstraintSet make_set(const RateArgs& a) {
  switch (constraint_kind_from_string(a.set)) {
    case ConstraintKind::busy_period: return ConstraintSet::busy_period();
    case ConstraintKind::a_delta: return ConstraintSet::a_delta(a.delta, a.horizon);
    case ConstraintKind::a_bar: return ConstraintSet::a_bar();
    case ConstraintKind::d_delta: return ConstraintSet::d_delta(a.delta);
    case ConstraintKind::d_delta_eps: return ConstraintSet::d_delta_eps(a.delta, a.eps);
  }
  throw std::invalid_argument("unknown set");
}

int run_rate(const RateArgs& a) {
  const std::string out = output_dir(a.common.out);
  const RunMeta meta{"rate", rate_config(a, out), std::nullopt};
  const RateOptions opt{a.n, a.tol};

  if (a.phi) {
    const double hv = required(a.h, "h");
    Json body;
    body["h"] = hv;
    body["phi"] = number(phi(hv));
    body["theta_upper_bound"] = number(0.5 * phi(hv));
    write_file(join_path(out, "phi.json"), json_document(meta, "phi", body));
    std::cout << "phi=" << format_double(phi(hv)) << "\n";
  }
  if (a.phi && a.sweep_delta.empty() && !a.compare_infima) return 0;
  const HurstParam h(required(a.h, "h"));

  if (!a.sweep_delta.empty()) {
    CsvTable table({"delta", "set", "j_delta", "value", "kkt_residual", "duality_gap", "horizon_flag"});
    for (double d : parse_range(a.sweep_delta)) {
      const RatePath p = j_delta_path(h, d, a.horizon, opt);
      table.add_row({format_double(d), to_string(p.kind), format_double(-p.value), format_double(p.value),
                     format_double(p.kkt_residual), format_double(p.duality_gap), p.horizon_flag ? "1" : "0"});
      std::cout << "delta=" << format_double(d) << " j_delta=" << format_double(-p.value)
                << " kkt_residual=" << format_double(p.kkt_residual) << "\n";
    }
    write_file(join_path(out, "rate_sweep.csv"), table.str(meta));
  }
  if (a.compare_infima) {
    const InfimumComparison c = compare_busy_period_infima(h, a.horizon, opt);
    write_file(join_path(out, "infima.json"), json_document(meta, "comparison", to_json(c)));
    std::cout << "A=" << format_double(c.value_a) << " A_bar=" << format_double(c.value_a_bar)
              << " B=" << format_double(c.value_b)
              << " max_relative_difference=" << format_double(c.max_relative_difference) << "\n";
  }
  if (a.sweep_delta.empty() && !a.compare_infima) {
    const RatePath p = min_norm(h, make_set(a), opt);
    write_file(join_path(out, "rate.json"), json_document(meta, "rate_path", to_json(p)));
    CsvTable table({"t", "z", "dual"});
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
      table.add_row(std::vector<double>{p.grid[i], p.z[static_cast<Eigen::Index>(i)],
                                        p.dual[static_cast<Eigen::Index>(i)]});
    }
    write_file(join_path(out, "rate_path.csv"), table.str(meta));
    const char* label = p.kind == ConstraintKind::busy_period ? "theta" : "value";
    std::cout << label << "=" << format_double(p.value) << " kkt_residual=" << format_double(p.kkt_residual)
              << " duality_gap=" << format_double(p.duality_gap) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
  Common common;
  std::optional<double> h;
  std::string horizons = "2,4,8";
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  double step = 0.0;
  double t_ref = 0.0;
  bool weighted = false;
};

int run_metrics(const MetricsArgs& a) {
  const std::string out = output_dir(a.common.out);
  const HurstParam h(required(a.h, "h"));
  const std::vector<double> horizons = parse_list(a.horizons);
  double t_min = horizons.front(), t_max = horizons.front();
  for (double t : horizons) {
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  const double step = a.step > 0.0 ? a.step : default_step(t_min);
  const double t_ref = a.t_ref > 0.0 ? a.t_ref : 8.0 * t_max;

  Json config;
  config["h"] = h.value();
  config["horizons"] = horizons;
  config["reps"] = a.reps;
  config["seed"] = a.seed;
  config["step"] = step;
  config["t_ref"] = t_ref;
  config["weighted"] = a.weighted;
  config["out"] = out;
  const RunMeta meta{"metrics", config, a.seed};

  const RunningMaxSamples s = sample_running_maxima(h, horizons, t_ref, a.reps, step, a.seed);
  std::vector<DistanceEstimate> d1, d2;
  CsvTable table({"horizon", "d1", "d1_ci_half_width", "d2", "d2_ci_half_width", "n_reps"});
  for (std::size_t k = 0; k < s.horizons.size(); ++k) {
    d1.push_back(d1_estimate(s.at_horizon[k], s.at_ref));
    d2.push_back(d2_hat(s.at_horizon[k], s.at_ref));
    table.add_row({format_double(s.horizons[k]), format_double(d1[k].value), format_double(d1[k].half_width),
                   format_double(d2[k].value), format_double(d2[k].half_width), std::to_string(s.reps)});
  }
  write_file(join_path(out, "metrics.csv"), table.str(meta));

  Json body;
  Json est = Json::array();
  for (std::size_t k = 0; k < s.horizons.size(); ++k) {
    Json row;
    row["horizon"] = s.horizons[k];
    row["d1"] = to_json(d1[k]);
    row["d2"] = to_json(d2[k]);
    est.push_back(row);
  }
  body["estimates"] = est;
  auto strictly_decreasing = [](const std::vector<DistanceEstimate>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i].value < v[i - 1].value)) return false;
    }
    return true;
  };
  body["d1_strictly_decreasing"] = strictly_decreasing(d1);
  body["d2_strictly_decreasing"] = strictly_decreasing(d2);

  int status = 0;
  for (const auto& [name, ests] : {std::pair{"d1_fit", &d1}, std::pair{"d2_fit", &d2}}) {
    try {
      const DecayFit fit = weibull_fit_confident(h, s.horizons, *ests, a.weighted);
      body[name] = to_json(fit);
      std::cout << name << " slope=" << format_double(fit.slope) << " r_squared=" << format_double(fit.r_squared)
                << "\n";
    } catch (const StarvedFitError& e) {
      Json err;
      err["error"] = e.what();
      err["excluded_horizons"] = e.starved_horizons();
      body[name] = err;
      std::cerr << name << ": " << e.what() << "\n";
      status = kExitFit;
    }
  }
  body["target_slope"] = -0.5;
  if (h.value() != 0.5) {
    body["note"] =
        "For H != 1/2 the logarithmic decay rate is approached slowly and without a known prefactor; the fitted "
        "slope is not expected to match -theta(H) at these horizons. Only sign and monotonicity are meaningful.";
  } else {
    body["note"] =
        "At H = 1/2 the metrics carry a t^{-3/2} polynomial prefactor, which biases a log-linear slope fitted "
        "over short horizons below -1/2.";
  }
  write_file(join_path(out, "metrics_fit.json"), json_document(meta, "metrics", body));
  return status;
}

// ---------------------------------------------------------------- horizon

struct HorizonArgs {
  Common common;
  std::optional<double> h;
  std::optional<double> theta;
  std::optional<double> x;
  double eps = 0.05;
  std::size_t n = 256;
  double tol = 1e-8;
  std::string batch;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream is(line);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int run_horizon(const HorizonArgs& a) {
  const std::string out = output_dir(a.common.out);
  const RateOptions opt{a.n, a.tol};
  Json config;
  config["h"] = opt_number(a.h);
  config["theta"] = opt_number(a.theta);
  config["x"] = opt_number(a.x);
  config["eps"] = a.eps;
  config["n"] = a.n;
  config["tol"] = a.tol;
  config["batch"] = a.batch;
  config["out"] = out;
  const RunMeta meta{"horizon", config, std::nullopt};

  if (a.batch.empty()) {
    const HurstParam h(required(a.h, "h"));
    const double x = required(a.x, "x");
    const HorizonResponse r =
        a.theta ? horizon(HorizonRequest(h, *a.theta, x, a.eps)) : horizon_with_computed_theta(h, x, a.eps, opt);
    Json doc;
    doc["meta"] = meta_json(meta);
    doc["horizon"] = to_json(r);
    std::cout << doc.dump() << "\n";
    write_file(join_path(out, "horizon.json"), json_document(meta, "horizon", to_json(r)));
    return 0;
  }

  std::ifstream in(a.batch);
  if (!in) throw std::runtime_error("cannot read batch file " + a.batch);
  std::string line;
  std::map<std::string, std::size_t> col;
  std::map<double, double> theta_cache;
  CsvTable table({"h", "theta", "x", "eps", "t", "t_star", "numerator_rate", "denominator_rate"});
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
      for (const char* k : {"h", "theta", "x", "eps"}) {
        if (!col.count(k)) throw std::runtime_error(std::string("batch file lacks column '") + k + "'");
      }
      continue;
    }
    auto cell = [&](const char* k) -> std::string {
      const std::size_t i = col.at(k);
      return i < cells.size() ? cells[i] : std::string();
    };
    const HurstParam h(std::stod(cell("h")));
    double th = 0.0;
    if (cell("theta").empty()) {
      auto it = theta_cache.find(h.value());
      if (it == theta_cache.end()) it = theta_cache.emplace(h.value(), theta(h, opt).value).first;
      th = it->second;
    } else {
      th = std::stod(cell("theta"));
    }
    const HorizonResponse r = horizon(HorizonRequest(h, th, std::stod(cell("x")), std::stod(cell("eps"))));
    table.add_row(std::vector<double>{h.value(), th, std::stod(cell("x")), std::stod(cell("eps")), r.t, r.t_star,
                                      r.numerator_rate, r.denominator_rate});
  }
  write_file(join_path(out, "horizon_batch.csv"), table.str(meta));
  std::cout << "rows=" << table.rows() << "\n";
  return 0;
}

// ---------------------------------------------------------------- srd

struct SrdArgs {
  Common common;
  std::string model = "gaussian";
  double mu = 0.0;
  double sigma2 = 1.0;
  double a = 1.0;
  double b = 2.0;
  double r = 2.0;
  double lambda = 0.5;
  double mu_j = 1.0;
  double x = 0.0;
  double s_max = 0.0;
  std::string sweep_x;
};

int run_srd(const SrdArgs& a) {
  const std::string out = output_dir(a.common.out);
  Json config;
  config["model"] = a.model;
  if (a.model == "gaussian") {
    config["mu"] = a.mu;
    config["sigma2"] = a.sigma2;
  } else if (a.model == "markov") {
    config["a"] = a.a;
    config["b"] = a.b;
    config["r"] = a.r;
  } else if (a.model == "cpoisson") {
    config["lambda"] = a.lambda;
    config["mu_j"] = a.mu_j;
  } else {
    throw CLI::ValidationError("--model", "must be gaussian, markov or cpoisson");
  }
  config["x"] = a.x;
  config["s_max"] = a.s_max;
  config["sweep_x"] = a.sweep_x;
  config["out"] = out;
  const RunMeta meta{"srd", config, std::nullopt};

  const CumulantModel m = a.model == "gaussian" ? CumulantModel::gaussian_iid(a.mu, a.sigma2)
                          : a.model == "markov" ? CumulantModel::markov_fluid_2state(a.a, a.b, a.r)
                                                : CumulantModel::compound_poisson_exp(a.lambda, a.mu_j);

  Json body;
  body["model"] = m.describe();
  body["mean_rate"] = number(m.mean_rate());
  body["stable"] = m.stable();
  body["di_decay_rate"] = m.stable() ? number(di_decay_rate(m)) : Json(nullptr);
  const KRateResult k = k_rate_solve(m, a.x, a.s_max);
  body["x"] = a.x;
  body["result"] = to_json(k);
  std::cout << "k_rate=" << format_double(k.value) << " s_star=" << format_double(k.s_star)
            << (k.horizon_flag ? " horizon_flag=1" : "") << "\n";

  if (!a.sweep_x.empty()) {
    CsvTable table({"x", "k_rate", "s_star", "horizon_flag"});
    for (double x : parse_range(a.sweep_x)) {
      const KRateResult kx = k_rate_solve(m, x, a.s_max);
      table.add_row({format_double(x), format_double(kx.value), format_double(kx.s_star), kx.horizon_flag ? "1" : "0"});
    }
    write_file(join_path(out, "srd_sweep.csv"), table.str(meta));
  }
  write_file(join_path(out, "srd.json"), json_document(meta, "srd", body));
  return 0;
}

// ---------------------------------------------------------------- covprobe

struct CovprobeArgs {
  Common common;
  std::optional<double> h;
  std::string lags = "1,2,4,8";
  std::size_t reps = 200;
  double warmup = 0.0;
  double step = 0.0;
  std::uint64_t seed = 1;
  std::size_t n = 256;
  double tol = 1e-8;
};

int run_covprobe(const CovprobeArgs& a) {
  const std::string out = output_dir(a.common.out);
  const HurstParam h(required(a.h, "h"));
  const std::vector<double> lags = parse_list(a.lags);
  const double step = a.step > 0.0 ? a.step : default_step(1.0);
  std::optional<double> theta_used;
  double warmup = a.warmup;
  if (!(warmup > 0.0)) {
    theta_used = theta(h, RateOptions{a.n, a.tol}).value;
    warmup = default_warmup(h, *theta_used, step, a.seed);
  }

  Json config;
  config["h"] = h.value();
  config["lags"] = lags;
  config["reps"] = a.reps;
  config["warmup"] = warmup;
  config["warmup_source"] = a.warmup > 0.0 ? "flag" : "horizon_planner";
  config["theta_for_warmup"] = opt_number(theta_used);
  config["step"] = step;
  config["seed"] = a.seed;
  config["n"] = a.n;
  config["tol"] = a.tol;
  config["out"] = out;
  const RunMeta meta{"covprobe", config, a.seed};

  const CovEstimate est = estimate_cov(h, lags, warmup, a.reps, step, a.seed);
  CsvTable table({"lag", "cov", "ci_half_width", "reps"});
  for (std::size_t i = 0; i < est.lags.size(); ++i) {
    table.add_row({format_double(est.lags[i]), format_double(est.cov[i]), format_double(est.ci_half_width[i]),
                   std::to_string(est.reps)});
  }
  write_file(join_path(out, "covprobe.csv"), table.str(meta));

  Json body;
  body["estimate"] = to_json(est);
  int status = 0;
  try {
    const ConjectureReport rep = conjecture_diagnostic(est, h);
    body["report"] = to_json(rep);
    std::cout << "preferred=" << to_string(rep.preferred) << " power_exponent=" << format_double(rep.power_exponent)
              << " weibull_rate=" << format_double(rep.weibull_rate) << "\n";
  } catch (const std::invalid_argument& e) {
    Json err;
    err["error"] = e.what();
    body["report"] = err;
    std::cerr << "covprobe: " << e.what() << "\n";
    status = kExitFit;
  }
  body["note"] = "Diagnostic only: the decay law of the stationary workload covariance is an open question.";
  write_file(join_path(out, "covprobe.json"), json_document(meta, "covprobe", body));
  return status;
}

template <class Args, class Fn>
Command make_command(CLI::App* app, std::shared_ptr<Args> args, Fn fn) {
  return {app, [app, args, fn]() -> int {
            if (!args->common.config.empty()) apply_config(*app, read_config(args->common.config));
            try {
              return fn(*args);
            } catch (const SolverError& e) {
              std::cerr << app->get_name() << ": solver failed: " << e.what()
                        << " (best duality gap " << format_double(e.best_gap()) << ")\n";
              return kExitSolver;
            }
          }};
}

}  // namespace

std::vector<Command> register_commands(CLI::App& root) {
  std::vector<Command> cmds;

  {
    auto a = std::make_shared<RateArgs>();
    auto* c = root.add_subcommand("rate", "Solve the discretized min-norm problems");
    add_common(*c, a->common);
    c->add_option("--h", a->h, "Hurst index");
    c->add_option("--n", a->n, "Grid points on (0, 1]");
    c->add_option("--tol", a->tol, "KKT tolerance");
    c->add_option("--set", a->set, "Constraint set: B, A_delta, A_bar, D_delta, D_delta_eps");
    c->add_option("--delta", a->delta, "Level offset delta");
    c->add_option("--eps", a->eps, "Offset eps for D_delta_eps");
    c->add_option("--horizon", a->horizon, "Horizon T for A_delta");
    c->add_option("--sweep-delta", a->sweep_delta, "Sweep J(delta) over start:stop:step");
    c->add_flag("--check-prop33", a->compare_infima, "Compare the three busy-period infima");
    c->add_flag("--phi", a->phi, "Report phi(H), the upper bound factor");
    cmds.push_back(make_command(c, a, run_rate));
  }
  {
    auto a = std::make_shared<MetricsArgs>();
    auto* c = root.add_subcommand("metrics", "Estimate D1/D2 by simulation and fit their decay");
    add_common(*c, a->common);
    c->add_option("--h", a->h, "Hurst index");
    c->add_option("--horizons", a->horizons, "Comma-separated horizons");
    c->add_option("--reps", a->reps, "Replications");
    c->add_option("--seed", a->seed, "Seed");
    c->add_option("--step", a->step, "Simulation step (default 2^-8 min(1, t))");
    c->add_option("--t-ref", a->t_ref, "Reference horizon standing in for t = inf (default 8 max t)");
    c->add_flag("--weighted", a->weighted, "Inverse-variance weighted fit");
    cmds.push_back(make_command(c, a, run_metrics));
  }
  {
    auto a = std::make_shared<HorizonArgs>();
    auto* c = root.add_subcommand("horizon", "Simulation horizon for a relative error budget");
    add_common(*c, a->common);
    c->add_option("--h", a->h, "Hurst index");
    c->add_option("--theta", a->theta, "Busy-period decay rate (computed when omitted)");
    c->add_option("--x", a->x, "Level");
    c->add_option("--eps", a->eps, "Relative error budget");
    c->add_option("--n", a->n, "Grid points when theta is computed");
    c->add_option("--tol", a->tol, "Tolerance when theta is computed");
    c->add_option("--batch", a->batch, "CSV of requests with columns h,theta,x,eps");
    cmds.push_back(make_command(c, a, run_horizon));
  }
  {
    auto a = std::make_shared<SrdArgs>();
    auto* c = root.add_subcommand("srd", "Decay rates for short-range dependent inputs");
    add_common(*c, a->common);
    c->add_option("--model", a->model, "gaussian, markov or cpoisson");
    c->add_option("--mu", a->mu, "gaussian: mean rate");
    c->add_option("--sigma2", a->sigma2, "gaussian: variance rate");
    c->add_option("--a", a->a, "markov: off->on rate");
    c->add_option("--b", a->b, "markov: on->off rate");
    c->add_option("--r", a->r, "markov: peak rate");
    c->add_option("--lambda", a->lambda, "cpoisson: arrival rate");
    c->add_option("--mu-j", a->mu_j, "cpoisson: job size rate");
    c->add_option("--x", a->x, "Level");
    c->add_option("--s-max", a->s_max, "Truncation of the time scale (default 10 max(1, x))");
    c->add_option("--sweep-x", a->sweep_x, "Sweep x over start:stop:step");
    cmds.push_back(make_command(c, a, run_srd));
  }
  {
    auto a = std::make_shared<CovprobeArgs>();
    auto* c = root.add_subcommand("covprobe", "Workload autocovariance and decay-law diagnostic");
    add_common(*c, a->common);
    c->add_option("--h", a->h, "Hurst index");
    c->add_option("--lags", a->lags, "Comma-separated positive lags");
    c->add_option("--reps", a->reps, "Replications (>= 30)");
    c->add_option("--warmup", a->warmup, "Warm-up time (default from the horizon planner)");
    c->add_option("--step", a->step, "Simulation step (default 2^-8)");
    c->add_option("--seed", a->seed, "Seed");
    c->add_option("--n", a->n, "Grid points for the theta solve behind the default warm-up");
    c->add_option("--tol", a->tol, "Tolerance for that solve");
    cmds.push_back(make_command(c, a, run_covprobe));
  }
  return cmds;
}

}  // namespace fbstore::cli
