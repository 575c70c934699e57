#pragma once

namespace soflq {

/// Global numeric tolerances shared by every module. The defaults are the
/// contract values; tests and the CLI may override them through the mutable
/// singleton below.
struct NumericPolicy {
  /// Relative residual accepted from a discrete Lyapunov solve.
  double lyapunov_residual_tol = 1e-10;
  /// Relative slack when checking that a matrix is symmetric.
  double symmetry_slack = 1e-12;
  /// Stabilizing means rho(A - BKC) < 1 - stability_margin.
  double stability_margin = 1e-12;
  /// lambda_min gate for positive definiteness of Q, R, X0 and full row rank of C.
  double pd_tolerance = 1e-12;
  /// Successive-change stopping tolerance of the Riccati value iteration.
  double dare_change_tol = 1e-12;
  /// Relative residual accepted from the Riccati fixed point.
  double dare_residual_tol = 1e-9;
  int dare_max_sweeps = 200000;
  /// Lyapunov solves switch from the vectorized direct solve to doubling
  /// iteration above this state dimension.
  int kron_max_dim = 50;
  /// Cap on m*d for full Hessian assembly.
  int hessian_dim_cap = 400;
  /// Relative tolerance on the two cost expressions agreeing.
  double dual_cost_rel_tol = 1e-8;
};

inline NumericPolicy& numeric_policy() {
  static NumericPolicy policy;
  return policy;
}

}  // namespace soflq
