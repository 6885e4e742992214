#include "fbstore/dual_qp.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbstore {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DualProblem {
  MatrixXd g;  // C Gamma C^T
  VectorXd b;
  std::vector<bool> equality;
};

DualProblem assemble(const MatrixXd& gram, std::span<const BoundConstraint> cons) {
  const auto m = static_cast<Index>(cons.size());
  DualProblem p{MatrixXd(m, m), VectorXd(m), std::vector<bool>(cons.size())};
  std::vector<bool> used(static_cast<std::size_t>(gram.rows()), false);
  for (Index k = 0; k < m; ++k) {
    const auto& c = cons[static_cast<std::size_t>(k)];
    if (c.index < 0 || c.index >= gram.rows()) throw std::invalid_argument("constraint index out of range");
    if (c.sign != 1.0 && c.sign != -1.0) throw std::invalid_argument("constraint sign must be +1 or -1");
    if (used[static_cast<std::size_t>(c.index)]) {
      throw std::invalid_argument("at most one constraint per coordinate");
    }
    used[static_cast<std::size_t>(c.index)] = true;
    p.b(k) = c.bound;
    p.equality[static_cast<std::size_t>(k)] = c.equality;
    for (Index l = 0; l <= k; ++l) {
      const auto& d = cons[static_cast<std::size_t>(l)];
      const double v = c.sign * d.sign * gram(c.index, d.index);
      p.g(k, l) = v;
      p.g(l, k) = v;
    }
  }
  return p;
}

double largest_eigenvalue(const MatrixXd& g, int iterations) {
  if (g.rows() == 0) return 0.0;
  VectorXd v = VectorXd::Ones(g.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    VectorXd w = g * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  // Power iteration approaches from below; pad so 1/L stays a safe step.
  return 1.02 * lambda;
}

void project(VectorXd& lambda, const std::vector<bool>& equality) {
  for (Index k = 0; k < lambda.size(); ++k) {
    if (!equality[static_cast<std::size_t>(k)] && lambda(k) < 0.0) lambda(k) = 0.0;
  }
}

// Worst of feasibility, sign and complementarity residuals, from the slack
// s = G lambda - b (= C z - b).
double quick_residual(const VectorXd& lambda, const VectorXd& slack, const std::vector<bool>& equality) {
  double r = 0.0;
  for (Index k = 0; k < lambda.size(); ++k) {
    if (equality[static_cast<std::size_t>(k)]) {
      r = std::max(r, std::abs(slack(k)));
    } else {
      r = std::max({r, -slack(k), -lambda(k), std::abs(lambda(k) * slack(k))});
    }
  }
  return r;
}

int accelerated_gradient(const DualProblem& p, double lipschitz, const DualQpOptions& opt, VectorXd& lambda) {
  if (lipschitz <= 0.0) return 0;
  VectorXd y = lambda;
  VectorXd prev = lambda;
  double t = 1.0;
  int it = 0;
  for (; it < opt.max_gradient_iterations; ++it) {
    const VectorXd grad = p.g * y - p.b;
    VectorXd next = y - grad / lipschitz;
    project(next, p.equality);
    if (grad.dot(next - prev) > 0.0) {
      t = 1.0;  // momentum restart
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - prev);
    prev = next;
    t = tn;
    if (it % 25 == 24) {
      const VectorXd slack = p.g * prev - p.b;
      if (quick_residual(prev, slack, p.equality) <= opt.handoff_tol) {
        ++it;
        break;
      }
    }
  }
  lambda = prev;
  return it;
}

// Solve G_FF mu = b_F for the free set F.
VectorXd solve_free(const DualProblem& p, const std::vector<Index>& free) {
  const auto f = static_cast<Index>(free.size());
  MatrixXd gff(f, f);
  VectorXd bf(f);
  for (Index i = 0; i < f; ++i) {
    bf(i) = p.b(free[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < f; ++j) {
      gff(i, j) = p.g(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    }
  }
  Eigen::LLT<MatrixXd> llt(gff);
  if (llt.info() == Eigen::Success) return llt.solve(bf);
  return gff.ldlt().solve(bf);
}

// Primal active-set method on the dual bound constraints (Lawson-Hanson
// style). `lambda` must satisfy the sign constraints on entry.
int active_set(const DualProblem& p, const DualQpOptions& opt, VectorXd& lambda) {
  const Index m = lambda.size();
  std::vector<bool> in_free(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    in_free[static_cast<std::size_t>(k)] = p.equality[static_cast<std::size_t>(k)] || lambda(k) > 0.0;
    if (!in_free[static_cast<std::size_t>(k)]) lambda(k) = 0.0;
  }
  const double add_tol = 0.1 * opt.tol;
  Index blocked = -1;
  Index just_added = -1;

  int it = 0;
  for (; it < opt.max_active_set_iterations; ++it) {
    std::vector<Index> free;
    for (Index k = 0; k < m; ++k) {
      if (in_free[static_cast<std::size_t>(k)]) free.push_back(k);
    }
    const VectorXd mu = free.empty() ? VectorXd() : solve_free(p, free);

    // Step back to the sign boundary if the unconstrained minimizer on F
    // has non-positive inequality multipliers.
    double alpha = 1.0;
    Index leaving = -1;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const Index k = free[i];
      if (p.equality[static_cast<std::size_t>(k)] || mu(static_cast<Index>(i)) > 0.0) continue;
      const double denom = lambda(k) - mu(static_cast<Index>(i));
      const double a = denom > 0.0 ? lambda(k) / denom : 0.0;
      if (a < alpha || leaving < 0) {
        alpha = a;
        leaving = k;
      }
    }
    if (leaving >= 0) {
      for (std::size_t i = 0; i < free.size(); ++i) {
        const Index k = free[i];
        lambda(k) += alpha * (mu(static_cast<Index>(i)) - lambda(k));
      }
      for (const Index k : free) {
        if (!p.equality[static_cast<std::size_t>(k)] && (lambda(k) <= 0.0 || k == leaving)) {
          lambda(k) = 0.0;
          in_free[static_cast<std::size_t>(k)] = false;
        }
      }
      if (leaving == just_added && alpha == 0.0) blocked = leaving;
      just_added = -1;
      continue;
    }

    lambda.setZero();
    for (std::size_t i = 0; i < free.size(); ++i) lambda(free[i]) = mu(static_cast<Index>(i));

    const VectorXd slack = p.g * lambda - p.b;
    Index worst = -1;
    double worst_violation = add_tol;
    for (Index k = 0; k < m; ++k) {
      if (in_free[static_cast<std::size_t>(k)] || k == blocked) continue;
      if (-slack(k) > worst_violation) {
        worst_violation = -slack(k);
        worst = k;
      }
    }
    if (worst < 0) break;
    in_free[static_cast<std::size_t>(worst)] = true;
    just_added = worst;
    blocked = -1;
  }
  return it;
}

void certify(const MatrixXd& gram, const Eigen::LLT<MatrixXd>& factor, std::span<const BoundConstraint> cons,
             const DualProblem& p, const DualQpOptions& opt, DualQpResult& r) {
  const Index n = gram.rows();
  VectorXd v = VectorXd::Zero(n);  // C^T lambda
  for (std::size_t k = 0; k < cons.size(); ++k) {
    v(cons[k].index) += cons[k].sign * r.lambda(static_cast<Index>(k));
  }
  r.z = gram * v;
  const VectorXd w = factor.solve(r.z);
  r.primal_value = 0.5 * r.z.dot(w);
  r.dual_value = p.b.dot(r.lambda) - 0.5 * v.dot(r.z);
  r.duality_gap = std::abs(r.primal_value - r.dual_value);
  r.stationarity = (w - v).lpNorm<Eigen::Infinity>() / std::max(1.0, v.lpNorm<Eigen::Infinity>());

  r.feasibility = 0.0;
  r.dual_sign = 0.0;
  r.complementarity = 0.0;
  for (std::size_t k = 0; k < cons.size(); ++k) {
    const auto ki = static_cast<Index>(k);
    const double slack = cons[k].sign * r.z(cons[k].index) - cons[k].bound;
    if (cons[k].equality) {
      r.feasibility = std::max(r.feasibility, std::abs(slack));
    } else {
      r.feasibility = std::max(r.feasibility, -slack);
      r.dual_sign = std::max(r.dual_sign, -r.lambda(ki));
      r.complementarity = std::max(r.complementarity, std::abs(r.lambda(ki) * slack));
    }
  }
  r.kkt_residual = std::max({r.feasibility, r.dual_sign, r.complementarity, r.stationarity});
  r.converged = r.kkt_residual <= opt.tol && r.duality_gap <= opt.tol * (1.0 + std::abs(r.primal_value));
}

}  // namespace

DualQpResult solve_min_norm_qp(const MatrixXd& gram, const Eigen::LLT<MatrixXd>& factor,
                               std::span<const BoundConstraint> constraints, const DualQpOptions& options,
                               const VectorXd* warm_start) {
  if (gram.rows() != gram.cols()) throw std::invalid_argument("Gram matrix must be square");
  if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  const DualProblem p = assemble(gram, constraints);
  const auto m = static_cast<Index>(constraints.size());

  DualQpResult r;
  r.lambda = VectorXd::Zero(m);
  if (warm_start) {
    if (warm_start->size() != m) throw std::invalid_argument("warm start has wrong length");
    r.lambda = *warm_start;
    project(r.lambda, p.equality);
  }
  r.lipschitz = largest_eigenvalue(p.g, options.power_iterations);
  r.gradient_iterations = accelerated_gradient(p, r.lipschitz, options, r.lambda);
  r.active_set_iterations = active_set(p, options, r.lambda);
  certify(gram, factor, constraints, p, options, r);
  if (!r.converged) {
    throw SolverError("min-norm solver did not reach tolerance (kkt " + std::to_string(r.kkt_residual) +
                          ", gap " + std::to_string(r.duality_gap) + ")",
                      r.duality_gap);
  }
  return r;
}

}  // namespace fbstore
