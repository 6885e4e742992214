#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbstore {

/// sign * z[index] >= bound, or == bound when `equality` is set.
struct BoundConstraint {
  Eigen::Index index = 0;
  double sign = 1.0;
  double bound = 0.0;
  bool equality = false;
};

struct DualQpOptions {
  /// Target for the KKT residual and the relative duality gap.
  double tol = 1e-8;
  int max_gradient_iterations = 20000;
  /// Gradient phase stops early once its KKT residual drops below this;
  /// the active-set phase then finishes the solve.
  double handoff_tol = 1e-5;
  int max_active_set_iterations = 2000;
  int power_iterations = 200;
};

/// Minimum-norm solution and its KKT certificate.
struct DualQpResult {
  Eigen::VectorXd z;       // primal: z = Gamma * C^T lambda
  Eigen::VectorXd lambda;  // one multiplier per constraint
  double primal_value = 0.0;  // 1/2 z^T Gamma^{-1} z via the factorization
  double dual_value = 0.0;    // b^T lambda - 1/2 lambda^T C Gamma C^T lambda
  double duality_gap = 0.0;
  double feasibility = 0.0;      // worst constraint violation
  double dual_sign = 0.0;        // worst negative inequality multiplier
  double complementarity = 0.0;  // worst |lambda_k * slack_k|
  double stationarity = 0.0;     // |Gamma^{-1} z - C^T lambda|_inf, scaled
  double kkt_residual = 0.0;     // max of the four residuals above
  double lipschitz = 0.0;
  int gradient_iterations = 0;
  int active_set_iterations = 0;
  bool converged = false;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_gap)
      : std::runtime_error(what), best_gap_(best_gap) {}
  double best_gap() const noexcept { return best_gap_; }

 private:
  double best_gap_;
};

/// Solves  minimize 1/2 z^T Gamma^{-1} z  subject to the bound constraints,
/// through the dual  maximize b^T lambda - 1/2 lambda^T G lambda  with
/// G = C Gamma C^T, lambda >= 0 for inequalities and free for equalities.
///
/// Phase one is accelerated projected gradient with step 1/L (L from power
/// iteration on G) and gradient-based momentum restart. Phase two is a
/// primal active-set method on the dual bound constraints, warm-started
/// from the gradient iterate, which terminates at the exact optimum of the
/// discretized problem. Each constraint must reference a distinct index.
///
/// Throws SolverError when the certificate does not reach `tol`.
DualQpResult solve_min_norm_qp(const Eigen::MatrixXd& gram, const Eigen::LLT<Eigen::MatrixXd>& factor,
                               std::span<const BoundConstraint> constraints,
                               const DualQpOptions& options = {},
                               const Eigen::VectorXd* warm_start = nullptr);

}  // namespace fbstore
