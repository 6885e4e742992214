#include "fbstore/rate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbstore {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TimeGrid unit_grid(std::size_t n, std::size_t count) {
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i) pts[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  return TimeGrid::from_points(std::move(pts));
}

DualQpOptions solver_options(const RateOptions& opt) {
  DualQpOptions o;
  o.tol = opt.tol;
  o.handoff_tol = std::max(opt.tol, 1e-5);
  return o;
}

void check_options(const RateOptions& opt) {
  if (opt.n < 8) throw std::invalid_argument("grid size n must be at least 8");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
}

RatePath make_path(const HurstParam& h, const ConstraintSet& set, const RateOptions& opt, TimeGrid grid,
                   std::span<const BoundConstraint> cons, const DualQpResult& r, double jitter) {
  RatePath p;
  p.hurst = h.value();
  p.kind = set.kind();
  p.delta = set.delta();
  p.eps = set.eps();
  p.horizon = set.horizon();
  p.n = opt.n;
  p.grid = std::move(grid);
  p.z = r.z;
  p.value = r.primal_value;
  p.dual_value = r.dual_value;
  p.dual = VectorXd::Zero(r.z.size());
  for (std::size_t k = 0; k < cons.size(); ++k) {
    p.dual(cons[k].index) = cons[k].sign * r.lambda(static_cast<Index>(k));
  }
  p.kkt_residual = r.kkt_residual;
  p.duality_gap = r.duality_gap;
  p.jitter = jitter;
  p.gradient_iterations = r.gradient_iterations;
  p.active_set_iterations = r.active_set_iterations;
  return p;
}

// Constraints on (0, 1] for every kind except a_delta.
std::vector<BoundConstraint> unit_interval_constraints(const ConstraintSet& set, const TimeGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<BoundConstraint> cons(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid[i];
    auto& c = cons[i];
    c.index = static_cast<Index>(i);
    switch (set.kind()) {
      case ConstraintKind::busy_period:
        c.sign = 1.0;
        c.bound = t;
        break;
      case ConstraintKind::a_bar:
        c.sign = -1.0;
        c.bound = -t;
        break;
      case ConstraintKind::d_delta:
        c.sign = 1.0;
        c.bound = t;
        break;
      case ConstraintKind::d_delta_eps:
        c.sign = 1.0;
        c.bound = t - set.eps();
        break;
      case ConstraintKind::a_delta:
        throw std::logic_error("a_delta handled separately");
    }
  }
  auto& last = cons.back();
  switch (set.kind()) {
    case ConstraintKind::a_bar:
      last = {last.index, 1.0, 1.0, true};
      break;
    case ConstraintKind::d_delta:
      last = {last.index, 1.0, 1.0 + set.delta(), true};
      break;
    case ConstraintKind::d_delta_eps:
      last = {last.index, 1.0, 1.0 + set.delta() - set.eps(), true};
      break;
    default:
      break;
  }
  return cons;
}

// The "exists s in (1, T]" clause: one problem per candidate activation
// point. Intermediate points carry no constraint and are marginalized out,
// so each candidate problem lives on (0, 1] plus the single point t_j.
RatePath solve_a_delta(const HurstParam& h, const ConstraintSet& set, const RateOptions& opt) {
  const std::size_t n = opt.n;
  const auto total = static_cast<std::size_t>(std::llround(set.horizon() * static_cast<double>(n)));
  if (total <= n) throw std::invalid_argument("horizon T must exceed 1 by at least one grid step");
  const TimeGrid full = unit_grid(n, total);
  const MatrixXd gamma = covariance_matrix<double>(h.value(), full.points());

  const auto ni = static_cast<Index>(n);
  MatrixXd sub(ni + 1, ni + 1);
  sub.topLeftCorner(ni, ni) = gamma.topLeftCorner(ni, ni);

  std::vector<BoundConstraint> cons(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    cons[i] = {static_cast<Index>(i), -1.0, -(set.delta() + full[i]), false};
  }

  DualQpOptions qp = solver_options(opt);
  std::optional<RatePath> best;
  std::optional<VectorXd> warm;
  for (std::size_t j = n; j < total; ++j) {
    const auto ji = static_cast<Index>(j);
    sub.block(0, ni, ni, 1) = gamma.block(0, ji, ni, 1);
    sub.block(ni, 0, 1, ni) = gamma.block(ji, 0, 1, ni);
    sub(ni, ni) = gamma(ji, ji);
    cons[n] = {ni, 1.0, set.delta() + full[j], false};

    const auto factor = factorize_covariance(sub);
    // Neighbouring candidates share most of their active set; after the
    // first solve the active-set phase alone finishes from the warm start.
    qp.max_gradient_iterations = warm ? 0 : DualQpOptions{}.max_gradient_iterations;
    const DualQpResult r = solve_min_norm_qp(sub, factor.llt, cons, qp, warm ? &*warm : nullptr);
    warm = r.lambda;
    if (!best || r.primal_value < best->value) {
      std::vector<double> pts(full.points().begin(), full.points().begin() + static_cast<long>(n));
      pts.push_back(full[j]);
      best = make_path(h, set, opt, TimeGrid::from_points(std::move(pts)), cons, r, factor.jitter);
      best->terminal_time = full[j];
      best->horizon_flag = j + 1 >= total;
    }
  }
  return *best;
}

}  // namespace

GramMatrix::GramMatrix(const HurstParam& h, TimeGrid grid) : h_(h.value()), grid_(std::move(grid)) {
  if (!(grid_[0] > 0.0)) throw std::invalid_argument("Gram grid points must be strictly positive");
  entries_ = covariance_matrix<double>(h_, grid_.points());
  factor_ = factorize_covariance(entries_);
}

double GramMatrix::inverse_quadratic_form(const VectorXd& z) const {
  if (z.size() != entries_.rows()) throw std::invalid_argument("vector does not match Gram grid");
  return z.dot(factor_.llt.solve(z));
}

GramMatrix build_gram(const HurstParam& h, const TimeGrid& grid) { return GramMatrix(h, grid); }

double rkhs_norm(const HurstParam& h, const TimeGrid& grid, const VectorXd& z) {
  if (z.size() != static_cast<Index>(grid.size())) throw std::invalid_argument("z does not match grid");
  if (grid.starts_at_zero()) {
    if (z(0) != 0.0) throw std::invalid_argument("paths must vanish at t = 0 (infinite norm)");
    if (grid.size() == 1) return 0.0;
    std::vector<double> pts(grid.points().begin() + 1, grid.points().end());
    const GramMatrix g(h, TimeGrid::from_points(std::move(pts)));
    return std::sqrt(std::max(0.0, g.inverse_quadratic_form(z.tail(z.size() - 1))));
  }
  const GramMatrix g(h, grid);
  return std::sqrt(std::max(0.0, g.inverse_quadratic_form(z)));
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::busy_period: return "B";
    case ConstraintKind::a_delta: return "A_delta";
    case ConstraintKind::a_bar: return "A_bar";
    case ConstraintKind::d_delta: return "D_delta";
    case ConstraintKind::d_delta_eps: return "D_delta_eps";
  }
  return "?";
}

ConstraintKind constraint_kind_from_string(const std::string& name) {
  for (auto k : {ConstraintKind::busy_period, ConstraintKind::a_delta, ConstraintKind::a_bar,
                 ConstraintKind::d_delta, ConstraintKind::d_delta_eps}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown constraint set: " + name);
}

ConstraintSet::ConstraintSet(ConstraintKind kind, double delta, double eps, double horizon)
    : kind_(kind), delta_(delta), eps_(eps), horizon_(horizon) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0, 1)");
  if (!(horizon >= 1.0)) throw std::invalid_argument("horizon T must be at least 1");
}

ConstraintSet ConstraintSet::busy_period() { return {ConstraintKind::busy_period, 0.0, 0.0, 1.0}; }
ConstraintSet ConstraintSet::a_delta(double delta, double horizon) {
  if (!(horizon > 1.0)) throw std::invalid_argument("horizon T must exceed 1");
  return {ConstraintKind::a_delta, delta, 0.0, horizon};
}
ConstraintSet ConstraintSet::a_bar() { return {ConstraintKind::a_bar, 0.0, 0.0, 1.0}; }
ConstraintSet ConstraintSet::d_delta(double delta) { return {ConstraintKind::d_delta, delta, 0.0, 1.0}; }
ConstraintSet ConstraintSet::d_delta_eps(double delta, double eps) {
  return {ConstraintKind::d_delta_eps, delta, eps, 1.0};
}

RatePath min_norm(const HurstParam& h, const ConstraintSet& set, const RateOptions& opt) {
  check_options(opt);
  if (set.kind() == ConstraintKind::a_delta) return solve_a_delta(h, set, opt);

  const TimeGrid grid = unit_grid(opt.n, opt.n);
  const GramMatrix gram(h, grid);
  const auto cons = unit_interval_constraints(set, grid);
  const DualQpResult r = solve_min_norm_qp(gram.entries(), gram.factor(), cons, solver_options(opt));
  return make_path(h, set, opt, grid, cons, r, gram.jitter());
}

RatePath theta(const HurstParam& h, const RateOptions& opt) {
  return min_norm(h, ConstraintSet::busy_period(), opt);
}

RatePath j_delta_path(const HurstParam& h, double delta, double horizon, const RateOptions& opt) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  const double threshold = 1.0 / h.value() - 1.0;
  if (delta <= threshold) return min_norm(h, ConstraintSet::d_delta(delta), opt);
  return min_norm(h, ConstraintSet::a_delta(delta, horizon), opt);
}

double j_delta(const HurstParam& h, double delta, double horizon, const RateOptions& opt) {
  return -j_delta_path(h, delta, horizon, opt).value;
}

double single_constraint_argmin(const HurstParam& h, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  const double hv = h.value();
  return std::max(1.0, delta * hv / (1.0 - hv));
}

double single_constraint_rate(const HurstParam& h, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  const double hv = h.value();
  if (delta > 1.0 / hv - 1.0) {
    return -0.5 * std::pow(delta / (1.0 - hv), 2.0 - 2.0 * hv) * std::pow(1.0 / hv, 2.0 * hv);
  }
  return -0.5 * (1.0 + delta) * (1.0 + delta);
}

double phi(double h) {
  if (!(h > 0.5 && h <= 1.0)) throw std::domain_error("phi is defined for 1/2 < H <= 1");
  // (2 - 2H) Gamma(2 - 2H) = Gamma(3 - 2H) removes the 0 * inf at H = 1.
  return std::tgamma(1.5 - h) / (h * (2.0 * h - 1.0) * std::tgamma(h - 0.5) * std::tgamma(3.0 - 2.0 * h));
}

InfimumComparison compare_busy_period_infima(const HurstParam& h, double horizon, const RateOptions& opt) {
  InfimumComparison c;
  c.hurst = h.value();
  const RatePath a = min_norm(h, ConstraintSet::a_delta(0.0, horizon), opt);
  c.value_a = a.value;
  c.horizon_flag = a.horizon_flag;
  c.value_a_bar = min_norm(h, ConstraintSet::a_bar(), opt).value;
  c.value_b = theta(h, opt).value;
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x), std::abs(y)); };
  c.rel_a_abar = rel(c.value_a, c.value_a_bar);
  c.rel_a_b = rel(c.value_a, c.value_b);
  c.rel_abar_b = rel(c.value_a_bar, c.value_b);
  c.max_relative_difference = std::max({c.rel_a_abar, c.rel_a_b, c.rel_abar_b});
  return c;
}

}  // namespace fbstore
