#include "fbstore/srd.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fbstore {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
}

}  // namespace

GoldenResult golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(hi >= lo)) throw std::invalid_argument("golden section: empty bracket");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 500 && (b - a) > tol * std::max(1.0, std::abs(a) + std::abs(b)) * 0.5; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // Endpoints can beat the interior probes when the minimum sits on the boundary.
  GoldenResult best{0.5 * (a + b), f(0.5 * (a + b))};
  for (double s : {lo, hi}) {
    const double v = f(s);
    if (v < best.value) best = {s, v};
  }
  return best;
}

CumulantModel CumulantModel::gaussian_iid(double mu, double sigma2) {
  require_positive(sigma2, "variance rate");
  if (!std::isfinite(mu)) throw std::invalid_argument("mean rate must be finite");
  CumulantModel m;
  m.kind_ = CumulantKind::gaussian_iid;
  m.params_ = {mu, sigma2};
  m.mean_rate_ = mu;
  return m;
}

CumulantModel CumulantModel::markov_fluid_2state(double a, double b, double r) {
  require_positive(a, "off->on rate");
  require_positive(b, "on->off rate");
  require_positive(r, "peak rate");
  CumulantModel m;
  m.kind_ = CumulantKind::markov_fluid_2state;
  m.params_ = {a, b, r};
  m.mean_rate_ = r * a / (a + b);
  m.min_rate_ = 0.0;
  m.peak_rate_ = r;
  m.boundary_min_ = a;  // probability of staying off decays at rate a
  m.boundary_peak_ = b; // probability of staying on decays at rate b
  return m;
}

CumulantModel CumulantModel::compound_poisson_exp(double lambda_a, double mu_j) {
  require_positive(lambda_a, "arrival rate");
  require_positive(mu_j, "job size rate");
  CumulantModel m;
  m.kind_ = CumulantKind::compound_poisson_exp;
  m.params_ = {lambda_a, mu_j};
  m.domain_ = {-kInf, mu_j, true, true};
  m.mean_rate_ = lambda_a / mu_j;
  m.min_rate_ = 0.0;
  m.boundary_min_ = lambda_a;  // no arrivals at all
  return m;
}

CumulantModel CumulantModel::tabulated(std::vector<double> s, std::vector<double> lambda) {
  if (s.size() != lambda.size() || s.size() < 3) {
    throw std::invalid_argument("tabulated cumulant needs at least 3 matching knots");
  }
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw std::invalid_argument("tabulated knots must be strictly increasing");
  }
  const auto zero = std::find(s.begin(), s.end(), 0.0);
  if (zero == s.end() || zero == s.begin() || zero + 1 == s.end()) {
    throw std::invalid_argument("tabulated knots must contain s = 0 in their interior");
  }
  const auto k = static_cast<std::size_t>(std::distance(s.begin(), zero));
  if (lambda[k] != 0.0) throw std::invalid_argument("tabulated cumulant must vanish at s = 0");
  CumulantModel m;
  m.kind_ = CumulantKind::tabulated;
  m.domain_ = {s.front(), s.back(), false, false};
  m.mean_rate_ = (lambda[k + 1] - lambda[k - 1]) / (s[k + 1] - s[k - 1]);
  m.knots_s_ = std::move(s);
  m.knots_l_ = std::move(lambda);
  return m;
}

double CumulantModel::operator()(double s) const {
  if (!domain_.contains(s)) throw std::domain_error("cumulant evaluated outside its domain");
  switch (kind_) {
    case CumulantKind::gaussian_iid:
      return params_[0] * s + 0.5 * params_[1] * s * s;
    case CumulantKind::markov_fluid_2state: {
      const double a = params_[0], b = params_[1], r = params_[2];
      // Largest eigenvalue of [[-a, a], [b, -b + r s]]; the discriminant is
      // written as a sum of squares.
      const double tr = r * s - a - b;
      const double u = r * s + a - b;
      return 0.5 * (tr + std::sqrt(u * u + 4.0 * a * b));
    }
    case CumulantKind::compound_poisson_exp:
      return params_[0] * s / (params_[1] - s);
    case CumulantKind::tabulated: {
      auto it = std::upper_bound(knots_s_.begin(), knots_s_.end(), s);
      std::size_t i = it == knots_s_.end() ? knots_s_.size() - 1 : static_cast<std::size_t>(it - knots_s_.begin());
      i = std::max<std::size_t>(i, 1);
      const double w = (s - knots_s_[i - 1]) / (knots_s_[i] - knots_s_[i - 1]);
      return (1.0 - w) * knots_l_[i - 1] + w * knots_l_[i];
    }
  }
  return 0.0;
}

std::string CumulantModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case CumulantKind::gaussian_iid: os << "gaussian_iid(mu=" << params_[0] << ", sigma2=" << params_[1] << ")"; break;
    case CumulantKind::markov_fluid_2state:
      os << "markov_fluid_2state(a=" << params_[0] << ", b=" << params_[1] << ", r=" << params_[2] << ")";
      break;
    case CumulantKind::compound_poisson_exp:
      os << "compound_poisson_exp(lambda=" << params_[0] << ", mu=" << params_[1] << ")";
      break;
    case CumulantKind::tabulated: os << "tabulated(" << knots_s_.size() << " knots)"; break;
  }
  return os.str();
}

double cumulant(const CumulantModel& model, double s) { return model(s); }

namespace {

// Next trial point moving away from 0 towards the domain boundary `edge`.
double expand(double s, double edge, bool open) {
  if (std::isinf(edge)) return 2.0 * s;
  if (open) return s + 0.5 * (edge - s);
  return std::abs(2.0 * s) < std::abs(edge) ? 2.0 * s : edge;
}

}  // namespace

LegendreResult legendre_solve(const CumulantModel& model, double a) {
  if (!std::isfinite(a)) return {kInf, 0.0};
  if (a < model.min_rate() || a > model.peak_rate()) return {kInf, a < model.min_rate() ? -kInf : kInf};
  if (a == model.min_rate()) return {model.boundary_rate_at_min(), -kInf};
  if (a == model.peak_rate()) return {model.boundary_rate_at_peak(), kInf};

  const auto& dom = model.domain();
  auto objective = [&](double s) { return s * a - model(s); };  // concave
  if (a == model.mean_rate()) return {0.0, 0.0};
  if (model.kind() == CumulantKind::gaussian_iid) {
    // conjugate of mu s + sigma2 s^2 / 2, exact
    const double mu = model.params()[0], sigma2 = model.params()[1];
    return {(a - mu) * (a - mu) / (2.0 * sigma2), (a - mu) / sigma2};
  }

  // The maximizer lies on the side of 0 where Lambda' reaches a.
  const bool upward = a > model.mean_rate();
  const double edge = upward ? dom.hi : dom.lo;
  const bool open = upward ? dom.hi_open : dom.lo_open;
  double inner = 0.0;
  double outer = upward ? 1.0 : -1.0;
  if (!dom.contains(outer)) outer = open ? 0.5 * edge : edge;
  double f_prev = 0.0;
  double f_outer = objective(outer);
  double inner_prev = 0.0;
  for (int it = 0; it < 2000 && f_outer > f_prev; ++it) {
    if (outer == edge) break;  // closed boundary reached
    inner_prev = inner;
    inner = outer;
    f_prev = f_outer;
    outer = expand(outer, edge, open);
    f_outer = objective(outer);
  }
  const double lo = std::min(inner_prev, outer);
  const double hi = std::max(inner_prev, outer);
  const auto best = golden_section_minimize([&](double s) { return -objective(s); }, lo, hi, 1e-10);
  return {std::max(0.0, -best.value), best.argmin};
}

double legendre(const CumulantModel& model, double a) { return legendre_solve(model, a).value; }

KRateResult k_rate_solve(const CumulantModel& model, double x, double s_max) {
  if (!(x >= 0.0)) throw std::invalid_argument("level x must be non-negative");
  if (s_max <= 0.0) s_max = 10.0 * std::max(1.0, x);
  if (!(s_max >= 1.0)) throw std::invalid_argument("s_max must be at least 1");

  KRateResult out;
  out.s_max = s_max;
  // (x + s) / s must not exceed the peak rate.
  double lo = 1.0;
  if (std::isfinite(model.peak_rate())) {
    if (model.peak_rate() <= 1.0) {
      out.value = -kInf;
      return out;
    }
    lo = std::max(lo, x / (model.peak_rate() - 1.0));
  }
  if (lo > s_max) {
    out.value = -kInf;
    out.s_star = s_max;
    out.horizon_flag = true;
    return out;
  }
  auto objective = [&](double s) { return s * legendre(model, (x + s) / s); };
  const auto best = golden_section_minimize(objective, lo, s_max, 1e-10);
  out.value = -best.value;
  out.s_star = best.argmin;
  out.horizon_flag = best.argmin >= 0.99 * s_max;
  return out;
}

double k_rate(const CumulantModel& model, double x, double s_max) { return k_rate_solve(model, x, s_max).value; }

double di_decay_rate(const CumulantModel& model) {
  if (!model.stable()) throw std::invalid_argument("decay rate requires a mean input rate below 1");
  return -legendre(model, 1.0);
}

}  // namespace fbstore
