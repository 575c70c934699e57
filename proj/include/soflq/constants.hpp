#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "soflq/cost.hpp"
#include "soflq/errors.hpp"
#include "soflq/matrix_ops.hpp"
#include "soflq/oracle.hpp"
#include "soflq/plant.hpp"

namespace soflq {

/// Landscape constants of the sublevel set {K stabilizing : J(K) <= alpha}.
/// gamma_bar = |A| + |B| q3 is the computable upper bound used in place of
/// the maximum of |A - BKC| over the sublevel set; it keeps M valid since M
/// is monotone in that quantity.
struct SublevelConstants {
  double alpha = 0.0;
  double mu = 0.0;
  double q3 = 0.0;
  double gamma_bar = 0.0;
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double zeta3 = 0.0;
  double zeta4 = 0.0;
  double L = 0.0;   // smoothness constant
  double M = 0.0;   // Hessian Lipschitz constant
};

inline SublevelConstants landscape_constants(const PlantSpec& plant, double alpha) {
  if (!(alpha > 0.0)) {
    throw DomainError("landscape_constants: alpha must be positive, got " +
                      std::to_string(alpha));
  }
  const double norm_a = spectral_norm(plant.A());
  const double norm_b = spectral_norm(plant.B());
  const double norm_c = spectral_norm(plant.C());
  const double norm_r = spectral_norm(plant.R());
  const double smin_q = sym_eig_extremes(plant.Q()).lambda_min;
  const double smin_r = sym_eig_extremes(plant.R()).lambda_min;
  const double mu = plant.mu();
  const double ratio = alpha / mu;

  SublevelConstants out;
  out.alpha = alpha;
  out.mu = mu;

  out.zeta1 =
      ((1.0 + norm_c * norm_c * norm_b * norm_b) * ratio + norm_c * norm_c * norm_r) /
          smin_q -
      1.0;

  out.L = 2.0 * norm_c * norm_c *
          (norm_r +
           norm_b * norm_b * (1.0 + 2.0 * out.zeta1 / (norm_c * norm_b)) * ratio) *
          alpha / smin_q;

  // q3 per the derivation's final bound (|R| alpha under the square root).
  out.q3 = std::sqrt(norm_r * alpha + norm_b * norm_b * alpha * alpha / mu) /
               (std::sqrt(mu) * smin_r) +
           norm_b * norm_a * alpha / (mu * smin_r);

  out.gamma_bar = norm_a + norm_b * out.q3;

  const double bc = norm_b * norm_c;
  out.zeta2 = 2.0 / smin_q *
              (norm_c * norm_r * out.q3 + out.gamma_bar * norm_c * norm_b * ratio);
  out.zeta3 =
      2.0 / smin_q *
      (norm_c * norm_c * norm_r +
       bc * (bc + out.zeta1 * out.gamma_bar + out.zeta2 * out.gamma_bar) * ratio);
  out.zeta4 = 2.0 / smin_q *
              (norm_c * norm_c * norm_r + bc * (bc + out.zeta1 * out.gamma_bar) * ratio);

  out.M = 2.0 * alpha * alpha / (mu * smin_q) * bc *
          ((2.0 * out.zeta1 + out.zeta2) * bc + 2.0 * out.zeta3 + out.zeta4);
  return out;
}

/// One audited inequality. For names ending in "_ge" the pass criterion is
/// lhs >= rhs (lower bound); otherwise lhs <= rhs, both with a 1e-9 relative
/// slack.
struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Evaluates the bound lemmas at one gain against the constants of the given
/// sublevel value. The smoothness entry uses the exact Hessian operator norm
/// as lhs, which dominates every sampled quadratic form.
inline std::vector<BoundCheck> bound_audit(const PlantSpec& plant,
                                           const Eigen::MatrixXd& gain, double alpha) {
  const CostBundle bundle = cost_bundle(plant, gain);
  if (bundle.J > alpha + 1e-12 * std::max(1.0, alpha)) {
    throw SublevelError("bound_audit: J(K) = " + std::to_string(bundle.J) +
                        " exceeds the sublevel value alpha = " + std::to_string(alpha));
  }
  const SublevelConstants constants = landscape_constants(plant, alpha);
  const double smin_q = sym_eig_extremes(plant.Q()).lambda_min;

  std::vector<BoundCheck> checks;
  auto push_upper = [&checks](std::string name, double lhs, double rhs) {
    const bool pass = detail::bound_holds_upper(lhs, rhs);
    checks.push_back({std::move(name), lhs, rhs, pass});
  };

  push_upper("P_norm_le_J_over_mu", spectral_norm(bundle.P), bundle.J / plant.mu());
  push_upper("Sigma_trace_le_J_over_smin_Q", bundle.Sigma.trace(), bundle.J / smin_q);
  push_upper("KC_norm_le_q3", spectral_norm(gain * plant.C()), constants.q3);
  push_upper("hessian_norm_le_L", spectral_norm(full_hessian(plant, gain)),
             constants.L);

  if (plant.c_square_invertible()) {
    const DominanceReport dominance = dominance_audit(plant, gain);
    push_upper("eq17_gap_le_sigma_star_trEE", dominance.eq17.lhs, dominance.eq17.rhs);
    push_upper("eq18_gap_le_grad_bound", dominance.eq18.lhs, dominance.eq18.rhs);
    checks.push_back({"eq19_gap_ge_mu_trEE", dominance.eq19.lhs, dominance.eq19.rhs,
                      detail::bound_holds_lower(dominance.eq19.lhs,
                                                dominance.eq19.rhs)});
  }
  return checks;
}

}  // namespace soflq
