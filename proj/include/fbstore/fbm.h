#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "fbstore/rng.h"

namespace fbstore {

/// Hurst index of the driving fractional Brownian motion, 0 < h < 1.
class HurstParam {
 public:
  explicit HurstParam(double h) : h_(h) {
    if (!(h > 0.0 && h < 1.0)) {
      throw std::invalid_argument("Hurst parameter must lie in (0, 1)");
    }
  }

  double value() const noexcept { return h_; }
  double two_h() const noexcept { return 2.0 * h_; }
  /// Exponent 2 - 2H of the Weibullian time axis.
  double weibull_exponent() const noexcept { return 2.0 - 2.0 * h_; }

 private:
  double h_;
};

/// Strictly increasing, non-negative time points. Uniform grids keep their
/// step so samplers can use the stationary-increment structure.
class TimeGrid {
 public:
  /// points[k] = start + k * step, k = 0..count-1.
  static TimeGrid uniform(double start, double step, std::size_t count);
  /// Uniform grid on [0, horizon] with the given step (horizon rounded to
  /// the nearest multiple of step).
  static TimeGrid uniform_to(double horizon, double step);
  static TimeGrid from_points(std::vector<double> points);

  std::span<const double> points() const noexcept { return points_; }
  double operator[](std::size_t k) const noexcept { return points_[k]; }
  std::size_t size() const noexcept { return points_.size(); }
  bool is_uniform() const noexcept { return uniform_; }
  double step() const noexcept { return step_; }
  bool starts_at_zero() const noexcept { return !points_.empty() && points_.front() == 0.0; }
  double back() const noexcept { return points_.back(); }

  /// Largest index k with points[k] <= t (up to a relative slack of 1e-9 steps).
  std::size_t index_at_or_before(double t) const;

  TimeGrid scaled(double alpha) const;

 private:
  TimeGrid(std::vector<double> points, bool uniform, double step)
      : points_(std::move(points)), uniform_(uniform), step_(step) {}

  std::vector<double> points_;
  bool uniform_ = false;
  double step_ = 0.0;
};

/// Values of A(.) on a grid; `jitter` is the diagonal regularization that
/// was needed to factorize the covariance (0 when none).
struct FbmPath {
  TimeGrid grid;
  Eigen::VectorXd values;
  double jitter = 0.0;
};

/// Cov(A(s), A(t)) = (|s|^{2H} + |t|^{2H} - |t - s|^{2H}) / 2.
template <typename Scalar>
Scalar fbm_covariance(Scalar h, Scalar s, Scalar t) {
  using std::abs;
  using std::pow;
  const Scalar two_h = Scalar(2) * h;
  return Scalar(0.5) * (pow(abs(s), two_h) + pow(abs(t), two_h) - pow(abs(t - s), two_h));
}

template <typename Scalar>
Scalar fbm_covariance(const HurstParam& h, Scalar s, Scalar t) {
  return fbm_covariance<Scalar>(Scalar(h.value()), s, t);
}

/// Covariance matrix of (A(t_1), ..., A(t_n)); the diagonal is t_i^{2H}.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> covariance_matrix(
    Scalar h, std::span<const Scalar> times) {
  using std::abs;
  using std::pow;
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  const Scalar two_h = Scalar(2) * h;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> var(n);
  for (Eigen::Index i = 0; i < n; ++i) var(i) = pow(abs(times[i]), two_h);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cov(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    cov(j, j) = var(j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Scalar c = Scalar(0.5) * (var(i) + var(j) - pow(abs(times[i] - times[j]), two_h));
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

/// Autocovariance of fractional Gaussian noise with increments over `step`.
double fgn_autocovariance(double h, long lag, double step);

/// Cholesky factor of a covariance matrix. If the plain factorization fails,
/// 1e-12 times the largest diagonal entry is added once and the
/// factorization retried; the jitter applied is kept for reporting.
struct CovarianceFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

CovarianceFactor factorize_covariance(const Eigen::MatrixXd& cov);

enum class SynthesisMethod { independent, circulant, cholesky };

/// Exact sampler for n consecutive fGn increments on a uniform grid.
///
/// Uses circulant embedding of the autocovariance when the embedding is
/// nonnegative definite and falls back to a dense Cholesky factor otherwise.
/// For h = 1/2 the increments are independent and drawn directly. The
/// sampler is immutable; per-thread scratch lives in a Workspace.
class FgnSampler {
 public:
  FgnSampler(HurstParam h, std::size_t n, double step);
  ~FgnSampler();
  FgnSampler(FgnSampler&&) noexcept;
  FgnSampler& operator=(FgnSampler&&) noexcept;

  class Workspace;
  struct WorkspaceDeleter {
    void operator()(Workspace* ws) const noexcept;
  };
  using WorkspacePtr = std::unique_ptr<Workspace, WorkspaceDeleter>;
  WorkspacePtr make_workspace() const;

  void sample(Seed seed, Workspace& ws, std::span<double> out) const;
  Eigen::VectorXd sample(Seed seed) const;

  std::size_t size() const noexcept { return n_; }
  double step() const noexcept { return step_; }
  SynthesisMethod method() const noexcept { return method_; }
  double jitter() const noexcept { return jitter_; }

 private:
  HurstParam h_;
  std::size_t n_;
  double step_;
  SynthesisMethod method_ = SynthesisMethod::circulant;
  std::size_t embed_size_ = 0;
  Eigen::VectorXd sqrt_eigen_;   // circulant: sqrt(lambda_k / m)
  Eigen::MatrixXd chol_lower_;   // cholesky fallback
  double jitter_ = 0.0;
};

Eigen::VectorXd sample_fgn(const HurstParam& h, std::size_t n, double step, Seed seed);

/// Exact draw of A(.) on `grid`. Uniform grids starting at 0 use cumulative
/// fGn; any other grid uses a dense factorization of its covariance.
FbmPath sample_path(const HurstParam& h, const TimeGrid& grid, Seed seed);

}  // namespace fbstore
