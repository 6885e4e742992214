#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fbstore/dual_qp.h"
#include "fbstore/fbm.h"

namespace fbstore {

/// Covariance of A(.) on a grid of strictly positive times, with its
/// Cholesky factor. z^T Gamma^{-1} z is the squared norm of the smallest
/// RKHS path through the values z.
class GramMatrix {
 public:
  GramMatrix(const HurstParam& h, TimeGrid grid);

  const TimeGrid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  const Eigen::LLT<Eigen::MatrixXd>& factor() const noexcept { return factor_.llt; }
  double jitter() const noexcept { return factor_.jitter; }
  double hurst() const noexcept { return h_; }

  /// z^T Gamma^{-1} z.
  double inverse_quadratic_form(const Eigen::VectorXd& z) const;

 private:
  double h_;
  TimeGrid grid_;
  Eigen::MatrixXd entries_;
  CovarianceFactor factor_;
};

GramMatrix build_gram(const HurstParam& h, const TimeGrid& grid);

/// sqrt(z^T Gamma^{-1} z). A grid point at t = 0 is allowed when z = 0 there.
double rkhs_norm(const HurstParam& h, const TimeGrid& grid, const Eigen::VectorXd& z);

enum class ConstraintKind {
  /// z >= t on (0, 1]: paths above the diagonal (busy-period set).
  busy_period,
  /// z <= delta + t on (0, 1] and z >= delta + t at some point of (1, T].
  a_delta,
  /// z <= t on (0, 1] and z(1) = 1.
  a_bar,
  /// z >= t on (0, 1] and z(1) = 1 + delta.
  d_delta,
  /// z >= t - eps on (0, 1] and z(1) = 1 + delta - eps.
  d_delta_eps,
};

std::string to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(const std::string& name);

/// A constraint family with validated parameters.
class ConstraintSet {
 public:
  static ConstraintSet busy_period();
  static ConstraintSet a_delta(double delta, double horizon = 3.0);
  static ConstraintSet a_bar();
  static ConstraintSet d_delta(double delta);
  static ConstraintSet d_delta_eps(double delta, double eps);

  ConstraintKind kind() const noexcept { return kind_; }
  double delta() const noexcept { return delta_; }
  double eps() const noexcept { return eps_; }
  double horizon() const noexcept { return horizon_; }

 private:
  ConstraintSet(ConstraintKind kind, double delta, double eps, double horizon);

  ConstraintKind kind_;
  double delta_ = 0.0;
  double eps_ = 0.0;
  double horizon_ = 1.0;
};

/// Solution of a discretized min-norm problem.
struct RatePath {
  double hurst = 0.5;
  ConstraintKind kind = ConstraintKind::busy_period;
  double delta = 0.0;
  double eps = 0.0;
  double horizon = 1.0;
  std::size_t n = 0;

  TimeGrid grid = TimeGrid::uniform(1.0, 1.0, 1);
  Eigen::VectorXd z;
  /// infimum of 1/2 |f|^2 over the discretized set
  double value = 0.0;
  /// Multiplier per grid point (signed by constraint direction; zero where
  /// no constraint is imposed).
  Eigen::VectorXd dual;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  double dual_value = 0.0;
  double jitter = 0.0;
  int gradient_iterations = 0;
  int active_set_iterations = 0;

  /// a_delta only: the activated terminal time and whether it sits within
  /// one grid step of the horizon T (horizon too short).
  std::optional<double> terminal_time;
  bool horizon_flag = false;
};

struct RateOptions {
  std::size_t n = 256;
  double tol = 1e-8;
};

/// Minimizes 1/2 z^T Gamma^{-1} z over the discretized constraint set on the
/// uniform grid t_i = i / n, i = 1..n (extended to (1, T] for a_delta).
RatePath min_norm(const HurstParam& h, const ConstraintSet& set, const RateOptions& opt = {});

/// Busy-period decay rate: min_norm over the busy-period set.
RatePath theta(const HurstParam& h, const RateOptions& opt = {});

/// Decay rate J(delta) as a solved path (negated value is J). Uses the
/// terminal-equality reduction for delta <= 1/H - 1 and the a_delta
/// formulation with horizon T beyond it.
RatePath j_delta_path(const HurstParam& h, double delta, double horizon, const RateOptions& opt = {});
double j_delta(const HurstParam& h, double delta, double horizon, const RateOptions& opt = {});

/// -inf over s >= 1 of (s + delta)^2 / (2 s^{2H}).
double single_constraint_rate(const HurstParam& h, double delta);

/// Minimizing s of the single-constraint problem.
double single_constraint_argmin(const HurstParam& h, double delta);

/// phi(H) = Gamma(3/2 - H) / (H (2H - 1) (2 - 2H) Gamma(H - 1/2) Gamma(2 - 2H)),
/// defined for 1/2 < h <= 1 (phi(1) = 1 as a limit).
double phi(double h);

struct InfimumComparison {
  double hurst = 0.5;
  double value_a = 0.0;      // a_delta with delta = 0
  double value_a_bar = 0.0;
  double value_b = 0.0;
  double rel_a_abar = 0.0;
  double rel_a_b = 0.0;
  double rel_abar_b = 0.0;
  double max_relative_difference = 0.0;
  bool horizon_flag = false;
};

/// Discretized infima over the three sets that share the busy-period decay
/// rate, with pairwise relative differences.
InfimumComparison compare_busy_period_infima(const HurstParam& h, double horizon,
                                             const RateOptions& opt = {});

}  // namespace fbstore
