#include "fbstore/fbm.h"

#include <algorithm>
#include <complex>
#include <unsupported/Eigen/FFT>

namespace fbstore {

TimeGrid TimeGrid::uniform(double start, double step, std::size_t count) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (start < 0.0) throw std::invalid_argument("grid must start at t >= 0");
  if (count == 0) throw std::invalid_argument("grid must contain at least one point");
  std::vector<double> pts(count);
  for (std::size_t k = 0; k < count; ++k) pts[k] = start + static_cast<double>(k) * step;
  return TimeGrid(std::move(pts), true, step);
}

TimeGrid TimeGrid::uniform_to(double horizon, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (horizon < 0.0) throw std::invalid_argument("horizon must be non-negative");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / step));
  return uniform(0.0, step, steps + 1);
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
  if (points.empty()) throw std::invalid_argument("grid must contain at least one point");
  if (points.front() < 0.0) throw std::invalid_argument("grid must start at t >= 0");
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (!(points[k] > points[k - 1])) {
      throw std::invalid_argument("grid points must be strictly increasing");
    }
  }
  return TimeGrid(std::move(points), false, 0.0);
}

std::size_t TimeGrid::index_at_or_before(double t) const {
  if (uniform_) {
    const double k = std::floor((t - points_.front()) / step_ + 1e-9);
    if (k < 0.0) throw std::out_of_range("time before grid start");
    return std::min(static_cast<std::size_t>(k), points_.size() - 1);
  }
  auto it = std::upper_bound(points_.begin(), points_.end(), t);
  if (it == points_.begin()) throw std::out_of_range("time before grid start");
  return static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
}

TimeGrid TimeGrid::scaled(double alpha) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("scale factor must be positive");
  std::vector<double> pts(points_.size());
  std::transform(points_.begin(), points_.end(), pts.begin(), [alpha](double t) { return alpha * t; });
  return TimeGrid(std::move(pts), uniform_, uniform_ ? alpha * step_ : 0.0);
}

double fgn_autocovariance(double h, long lag, double step) {
  const double k = std::abs(static_cast<double>(lag));
  const double two_h = 2.0 * h;
  const double scale = std::pow(step, two_h);
  if (lag == 0) return scale;
  return 0.5 * scale *
         (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

CovarianceFactor factorize_covariance(const Eigen::MatrixXd& cov) {
  CovarianceFactor f;
  f.llt.compute(cov);
  if (f.llt.info() == Eigen::Success) return f;
  f.jitter = 1e-12 * cov.diagonal().maxCoeff();
  Eigen::MatrixXd reg = cov;
  reg.diagonal().array() += f.jitter;
  f.llt.compute(reg);
  if (f.llt.info() != Eigen::Success) {
    throw std::runtime_error("covariance factorization failed after jitter retry");
  }
  return f;
}

class FgnSampler::Workspace {
 public:
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  std::vector<std::complex<double>> time;
  std::vector<double> normals;
};

namespace {

constexpr std::size_t kMaxDenseIncrements = 8192;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FgnSampler::FgnSampler(HurstParam h, std::size_t n, double step) : h_(h), n_(n), step_(step) {
  if (n == 0) throw std::invalid_argument("fGn sample size must be at least 1");
  if (!(step > 0.0)) throw std::invalid_argument("fGn step must be positive");

  if (h.value() == 0.5) {
    method_ = SynthesisMethod::independent;
    return;
  }

  const std::size_t half = next_pow2(std::max<std::size_t>(n, 2));
  const std::size_t m = 2 * half;
  std::vector<std::complex<double>> row(m);
  for (std::size_t k = 0; k <= half; ++k) {
    row[k] = fgn_autocovariance(h.value(), static_cast<long>(k), step);
  }
  for (std::size_t k = half + 1; k < m; ++k) row[k] = row[m - k];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> eig;
  fft.fwd(eig, row);

  double max_eig = 0.0;
  double min_eig = 0.0;
  for (const auto& e : eig) {
    max_eig = std::max(max_eig, e.real());
    min_eig = std::min(min_eig, e.real());
  }
  if (min_eig >= -1e-10 * max_eig) {
    method_ = SynthesisMethod::circulant;
    embed_size_ = m;
    sqrt_eigen_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      sqrt_eigen_(static_cast<Eigen::Index>(k)) =
          std::sqrt(std::max(eig[k].real(), 0.0) / static_cast<double>(m));
    }
    return;
  }

  if (n > kMaxDenseIncrements) {
    throw std::runtime_error("circulant embedding not nonnegative definite and grid too long for dense factorization");
  }
  method_ = SynthesisMethod::cholesky;
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd cov(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) cov(i, j) = fgn_autocovariance(h.value(), i - j, step);
  }
  auto factor = factorize_covariance(cov);
  chol_lower_ = factor.llt.matrixL();
  jitter_ = factor.jitter;
}

FgnSampler::~FgnSampler() = default;
FgnSampler::FgnSampler(FgnSampler&&) noexcept = default;
FgnSampler& FgnSampler::operator=(FgnSampler&&) noexcept = default;

void FgnSampler::WorkspaceDeleter::operator()(Workspace* ws) const noexcept { delete ws; }

FgnSampler::WorkspacePtr FgnSampler::make_workspace() const {
  WorkspacePtr ws(new Workspace());
  switch (method_) {
    case SynthesisMethod::independent:
      break;
    case SynthesisMethod::circulant:
      ws->freq.resize(embed_size_);
      ws->time.resize(embed_size_);
      ws->normals.resize(2 * embed_size_);
      break;
    case SynthesisMethod::cholesky:
      ws->normals.resize(n_);
      break;
  }
  return ws;
}

void FgnSampler::sample(Seed seed, Workspace& ws, std::span<double> out) const {
  if (out.size() != n_) throw std::invalid_argument("output span has wrong length");
  NormalStream normals(seed);
  switch (method_) {
    case SynthesisMethod::independent: {
      normals.fill(out);
      const double sd = std::sqrt(step_);
      for (double& v : out) v *= sd;
      return;
    }
    case SynthesisMethod::circulant: {
      normals.fill(ws.normals);
      for (std::size_t k = 0; k < embed_size_; ++k) {
        const double s = sqrt_eigen_(static_cast<Eigen::Index>(k));
        ws.freq[k] = {s * ws.normals[2 * k], s * ws.normals[2 * k + 1]};
      }
      ws.fft.fwd(ws.time, ws.freq);
      for (std::size_t k = 0; k < n_; ++k) out[k] = ws.time[k].real();
      return;
    }
    case SynthesisMethod::cholesky: {
      normals.fill(ws.normals);
      Eigen::Map<const Eigen::VectorXd> z(ws.normals.data(), static_cast<Eigen::Index>(n_));
      Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(n_)) =
          chol_lower_.triangularView<Eigen::Lower>() * z;
      return;
    }
  }
}

Eigen::VectorXd FgnSampler::sample(Seed seed) const {
  auto ws = make_workspace();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_));
  sample(seed, *ws, std::span<double>(out.data(), n_));
  return out;
}

Eigen::VectorXd sample_fgn(const HurstParam& h, std::size_t n, double step, Seed seed) {
  return FgnSampler(h, n, step).sample(seed);
}

FbmPath sample_path(const HurstParam& h, const TimeGrid& grid, Seed seed) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  FbmPath path{grid, Eigen::VectorXd::Zero(n), 0.0};
  if (n == 1 && grid.starts_at_zero()) return path;

  if (grid.is_uniform() && grid.starts_at_zero()) {
    FgnSampler sampler(h, grid.size() - 1, grid.step());
    const Eigen::VectorXd inc = sampler.sample(seed);
    double acc = 0.0;
    for (Eigen::Index k = 1; k < n; ++k) {
      acc += inc(k - 1);
      path.values(k) = acc;
    }
    path.jitter = sampler.jitter();
    return path;
  }

  // Dense route: A(0) = 0 is deterministic, so factorize over positive times only.
  const std::size_t offset = grid.starts_at_zero() ? 1 : 0;
  const auto times = grid.points().subspan(offset);
  const Eigen::MatrixXd cov = covariance_matrix<double>(h.value(), times);
  const auto factor = factorize_covariance(cov);
  Eigen::VectorXd z(static_cast<Eigen::Index>(times.size()));
  NormalStream normals(seed);
  normals.fill(std::span<double>(z.data(), times.size()));
  path.values.tail(static_cast<Eigen::Index>(times.size())) = factor.llt.matrixL() * z;
  path.jitter = factor.jitter;
  return path;
}

}  // namespace fbstore
