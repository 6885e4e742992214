#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fbstore {

/// Interval of s on which the cumulant is finite.
struct CumulantDomain {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double s) const noexcept {
    return (lo_open ? s > lo : s >= lo) && (hi_open ? s < hi : s <= hi);
  }
};

enum class CumulantKind { gaussian_iid, markov_fluid_2state, compound_poisson_exp, tabulated };

/// Asymptotic cumulant function Lambda(s) = lim (1/t) log E exp(s A(t)) of a
/// short-range dependent input with stationary increments.
class CumulantModel {
 public:
  /// Lambda(s) = mu s + sigma2 s^2 / 2.
  static CumulantModel gaussian_iid(double mu, double sigma2);
  /// On-off fluid: off -> on at rate a, on -> off at rate b, peak rate r.
  static CumulantModel markov_fluid_2state(double a, double b, double r);
  /// Poisson arrivals at rate lambda_a with exponential work of mean 1/mu_j.
  static CumulantModel compound_poisson_exp(double lambda_a, double mu_j);
  /// Piecewise-linear interpolation of tabulated (s, Lambda(s)) on the
  /// closed interval spanned by the knots; the knots must include s = 0
  /// with Lambda(0) = 0.
  static CumulantModel tabulated(std::vector<double> s, std::vector<double> lambda);

  CumulantKind kind() const noexcept { return kind_; }
  const CumulantDomain& domain() const noexcept { return domain_; }
  const std::vector<double>& params() const noexcept { return params_; }

  /// Lambda(s); throws std::domain_error outside the domain.
  double operator()(double s) const;

  /// Lambda'(0).
  double mean_rate() const noexcept { return mean_rate_; }
  /// Mean rate below the unit service rate.
  bool stable() const noexcept { return mean_rate_ < 1.0; }

  /// Range of input rates with finite rate function; endpoints may be
  /// infinite. At a finite endpoint the supremum in the Legendre transform
  /// is approached as s -> -inf / +inf and `boundary_rate_*` holds its limit.
  double min_rate() const noexcept { return min_rate_; }
  double peak_rate() const noexcept { return peak_rate_; }
  double boundary_rate_at_min() const noexcept { return boundary_min_; }
  double boundary_rate_at_peak() const noexcept { return boundary_peak_; }

  std::string describe() const;

 private:
  CumulantKind kind_ = CumulantKind::gaussian_iid;
  std::vector<double> params_;
  std::vector<double> knots_s_, knots_l_;
  CumulantDomain domain_;
  double mean_rate_ = 0.0;
  double min_rate_ = -std::numeric_limits<double>::infinity();
  double peak_rate_ = std::numeric_limits<double>::infinity();
  double boundary_min_ = std::numeric_limits<double>::infinity();
  double boundary_peak_ = std::numeric_limits<double>::infinity();
};

double cumulant(const CumulantModel& model, double s);

struct LegendreResult {
  double value = 0.0;  // +inf when a lies outside the achievable rates
  double argmax = 0.0; // maximizing s (infinite when the supremum is a limit)
};

/// I(a) = sup_s (s a - Lambda(s)) by golden-section search over a bracket
/// expanded until it contains the maximizer (closed form for gaussian_iid).
LegendreResult legendre_solve(const CumulantModel& model, double a);
double legendre(const CumulantModel& model, double a);

struct KRateResult {
  double value = 0.0;     // K(x) = -inf_{1 <= s <= s_max} s I((x + s) / s)
  double s_star = 1.0;
  double s_max = 1.0;
  /// Minimizer within 1% of s_max: the truncation horizon is too short.
  bool horizon_flag = false;
};

/// s_max <= 0 selects the default 10 max(1, x).
KRateResult k_rate_solve(const CumulantModel& model, double x, double s_max = 0.0);
double k_rate(const CumulantModel& model, double x, double s_max = 0.0);

/// Decay rate of the convergence metrics for this input: K(0) = -I(1).
/// Requires a stable model.
double di_decay_rate(const CumulantModel& model);

struct GoldenResult {
  double argmin = 0.0;
  double value = 0.0;
};

/// Golden-section minimization of a unimodal function on [lo, hi] until the
/// bracket is narrower than `tol`.
GoldenResult golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                     double tol = 1e-10);

}  // namespace fbstore
