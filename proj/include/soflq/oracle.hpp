#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "soflq/cost.hpp"
#include "soflq/errors.hpp"
#include "soflq/matrix_ops.hpp"
#include "soflq/plant.hpp"
#include "soflq/rng.hpp"

namespace soflq {

namespace detail {

inline double cost_at(const PlantSpec& plant, const Eigen::MatrixXd& gain,
                      const char* who) {
  const double rho = closed_loop_radius(plant, gain);
  if (!(rho < 1.0 - numeric_policy().stability_margin)) {
    throw InstabilityError(std::string(who) +
                           ": perturbed gain left the stabilizing set (rho = " +
                           std::to_string(rho) + "); reduce the step h",
                           rho);
  }
  return cost_bundle(plant, gain).J;
}

}  // namespace detail

/// Entrywise central differences (J(K + h e_ij) - J(K - h e_ij)) / (2h);
/// h is halved (a few times) if a perturbation leaves the stabilizing set.
inline Eigen::MatrixXd fd_gradient(const PlantSpec& plant, const Eigen::MatrixXd& gain,
                                   double h = 1e-5) {
  require_gain_shape(plant, gain);
  if (!(h > 0.0)) throw DomainError("fd_gradient: step h must be positive");
  for (int attempt = 0; attempt < 40; ++attempt) {
    try {
      Eigen::MatrixXd out(plant.m(), plant.d());
      for (int i = 0; i < plant.m(); ++i) {
        for (int j = 0; j < plant.d(); ++j) {
          Eigen::MatrixXd perturbed = gain;
          perturbed(i, j) = gain(i, j) + h;
          const double plus = detail::cost_at(plant, perturbed, "fd_gradient");
          perturbed(i, j) = gain(i, j) - h;
          const double minus = detail::cost_at(plant, perturbed, "fd_gradient");
          out(i, j) = (plus - minus) / (2.0 * h);
        }
      }
      return out;
    } catch (const InstabilityError&) {
      h *= 0.5;
    }
  }
  throw InstabilityError(
      "fd_gradient: perturbations remain unstabilizing even after shrinking h", 1.0);
}

/// Second-order central difference (J(K+hZ) - 2J(K) + J(K-hZ)) / h^2.
inline double fd_hessian_quadratic(const PlantSpec& plant, const Eigen::MatrixXd& gain,
                                   const Eigen::MatrixXd& direction, double h = 1e-4) {
  require_gain_shape(plant, gain);
  require_gain_shape(plant, direction, "direction");
  if (!(h > 0.0)) throw DomainError("fd_hessian_quadratic: step h must be positive");
  const double center = detail::cost_at(plant, gain, "fd_hessian_quadratic");
  for (int attempt = 0; attempt < 40; ++attempt) {
    try {
      const double plus =
          detail::cost_at(plant, gain + h * direction, "fd_hessian_quadratic");
      const double minus =
          detail::cost_at(plant, gain - h * direction, "fd_hessian_quadratic");
      return (plus - 2.0 * center + minus) / (h * h);
    } catch (const InstabilityError&) {
      h *= 0.5;
    }
  }
  throw InstabilityError(
      "fd_hessian_quadratic: segment leaves the stabilizing set even after shrinking h",
      1.0);
}

/// Stabilizing solution of the discrete algebraic Riccati equation together
/// with the optimal state-feedback gain and cost.
struct RiccatiSolution {
  Eigen::MatrixXd P_star;
  Eigen::MatrixXd K_s_star;
  double J_s_star = 0.0;
  double residual = 0.0;
};

/// Riccati fixed point by value iteration from P = Q, stopping when the
/// successive change falls below the policy tolerance.
inline RiccatiSolution dare_optimal_gain(const PlantSpec& plant) {
  const Eigen::MatrixXd& a = plant.A();
  const Eigen::MatrixXd& b = plant.B();
  const Eigen::MatrixXd& q = plant.Q();
  const Eigen::MatrixXd& r = plant.R();

  Eigen::MatrixXd p = q;
  const int max_sweeps = numeric_policy().dare_max_sweeps;
  const double change_tol = numeric_policy().dare_change_tol;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::MatrixXd bpa = b.transpose() * p * a;
    const Eigen::MatrixXd gram = r + b.transpose() * p * b;
    const Eigen::MatrixXd next =
        symmetrize(q + a.transpose() * p * a - bpa.transpose() * gram.ldlt().solve(bpa));
    const double change = (next - p).norm();
    p = next;
    if (!p.allFinite() || p.norm() > 1e140) {
      throw StabilizabilityError(
          "Riccati value iteration diverged; (A, B) is likely not stabilizable");
    }
    if (change <= change_tol * std::max(1.0, p.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw StabilizabilityError(
        "Riccati value iteration did not converge within " +
        std::to_string(max_sweeps) + " sweeps");
  }

  RiccatiSolution out;
  out.P_star = p;
  const Eigen::MatrixXd gram = r + b.transpose() * p * b;
  out.K_s_star = gram.ldlt().solve(b.transpose() * p * a);
  out.J_s_star = (p * plant.X0()).trace();

  const Eigen::MatrixXd bpa = b.transpose() * p * a;
  out.residual =
      (p - q - a.transpose() * p * a + bpa.transpose() * gram.ldlt().solve(bpa)).norm();
  if (!(out.residual <= numeric_policy().dare_residual_tol * std::max(1.0, p.norm()))) {
    throw NumericalError("Riccati residual " + std::to_string(out.residual) +
                         " exceeds tolerance");
  }
  const double rho = spectral_radius(a - b * out.K_s_star);
  if (!(rho < 1.0)) {
    throw NumericalError("Riccati gain is not stabilizing: rho = " + std::to_string(rho));
  }
  return out;
}

namespace detail {

/// Plain backtracking gradient descent used internally when an audit needs a
/// best-known stationary gain and the full descent driver is not available.
inline Eigen::MatrixXd descend_to_stationary(const PlantSpec& plant,
                                             Eigen::MatrixXd gain, double grad_tol,
                                             long max_iters) {
  CostBundle bundle = cost_bundle(plant, gain);
  double step = 1.0;
  for (long iter = 0; iter < max_iters; ++iter) {
    const Eigen::MatrixXd grad = gradient(plant, bundle);
    const double gradnorm = grad.norm();
    if (gradnorm <= grad_tol) break;
    bool accepted = false;
    for (int halving = 0; halving < 70; ++halving) {
      const Eigen::MatrixXd candidate = gain - step * grad;
      if (is_stabilizing(plant, candidate)) {
        const CostBundle cb = cost_bundle(plant, candidate);
        if (cb.J <= bundle.J - 1e-4 * step * gradnorm * gradnorm) {
          gain = candidate;
          bundle = cb;
          accepted = true;
          step *= 2.0;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return gain;
}

}  // namespace detail

struct DominanceCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// Gradient-dominance audit. With C square and invertible all three
/// inequalities are evaluated against the Riccati optimum; otherwise only the
/// first (cost-gap vs. tr(E'E)) is evaluated against a descent-found gain and
/// flagged approximate.
struct DominanceReport {
  bool c_invertible = false;
  bool approximate = false;
  DominanceCheck eq17;
  DominanceCheck eq18;
  DominanceCheck eq19;
  double j_star = 0.0;
  double sigma_star_norm = 0.0;
};

namespace detail {

inline bool bound_holds_upper(double lhs, double rhs) {
  return lhs <= rhs + 1e-9 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

inline bool bound_holds_lower(double lhs, double rhs) {
  return lhs >= rhs - 1e-9 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace detail

inline DominanceReport dominance_audit(const PlantSpec& plant,
                                       const Eigen::MatrixXd& gain) {
  const CostBundle bundle = cost_bundle(plant, gain);
  const double tr_ee = (bundle.E.transpose() * bundle.E).trace();
  const double smin_r = sym_eig_extremes(plant.R()).lambda_min;

  DominanceReport report;
  report.c_invertible = plant.c_square_invertible();

  Eigen::MatrixXd best_gain;
  if (report.c_invertible) {
    const RiccatiSolution riccati = dare_optimal_gain(plant);
    best_gain = riccati.K_s_star * plant.C().inverse();
    report.j_star = riccati.J_s_star;
  } else {
    report.approximate = true;
    best_gain = detail::descend_to_stationary(plant, gain, 1e-11, 200000);
    report.j_star = cost_bundle(plant, best_gain).J;
  }
  const CostBundle at_best = cost_bundle(plant, best_gain);
  report.sigma_star_norm = spectral_norm(at_best.Sigma);

  report.eq17.lhs = bundle.J - report.j_star;
  report.eq17.rhs = report.sigma_star_norm * tr_ee / smin_r;
  report.eq17.pass = detail::bound_holds_upper(report.eq17.lhs, report.eq17.rhs);

  if (report.c_invertible) {
    const double smin_c = min_singular_value(plant.C());
    const double gradsq = gradient(plant, bundle).squaredNorm();
    const double mu = plant.mu();

    report.eq18.lhs = bundle.J - report.j_star;
    report.eq18.rhs =
        report.sigma_star_norm * gradsq / (4.0 * mu * mu * smin_c * smin_c * smin_r);
    report.eq18.pass = detail::bound_holds_upper(report.eq18.lhs, report.eq18.rhs);

    const Eigen::MatrixXd inner =
        plant.R() + plant.B().transpose() * bundle.P * plant.B();
    report.eq19.lhs = bundle.J - report.j_star;
    report.eq19.rhs = mu * tr_ee / spectral_norm(inner);
    report.eq19.pass = detail::bound_holds_lower(report.eq19.lhs, report.eq19.rhs);
  }
  return report;
}

/// Monte Carlo estimate of the truncated cost, with its standard error and a
/// truncation-bias bound rho^(2T) J / (1 - rho^2).
struct RolloutEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double bias_bound = 0.0;
};

/// Averages the horizon-T stage-cost sum over `samples` initial states drawn
/// as zero-mean Gaussians with second moment X0. Deterministic given seed.
inline RolloutEstimate rollout_cost(const PlantSpec& plant, const Eigen::MatrixXd& gain,
                                    long horizon, long samples, std::uint64_t seed) {
  if (horizon < 1) throw DomainError("rollout_cost: horizon must be >= 1");
  if (samples < 1) throw DomainError("rollout_cost: samples must be >= 1");
  const Eigen::MatrixXd f = closed_loop(plant, gain);
  const double rho = spectral_radius(f);
  detail::require_stabilizing(rho, "rollout_cost");

  const Eigen::MatrixXd kc = gain * plant.C();
  const Eigen::MatrixXd stage = symmetrize(plant.Q() + kc.transpose() * plant.R() * kc);
  const Eigen::MatrixXd root = Eigen::LLT<Eigen::MatrixXd>(plant.X0()).matrixL();

  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  Eigen::VectorXd x(plant.n());
  for (long s = 0; s < samples; ++s) {
    x = root * rng.gaussian_vector(plant.n());
    double total = 0.0;
    for (long t = 0; t < horizon; ++t) {
      total += x.dot(stage * x);
      x = f * x;
    }
    sum += total;
    sum_sq += total * total;
  }

  RolloutEstimate out;
  out.value = sum / static_cast<double>(samples);
  if (samples > 1) {
    const double var =
        std::max(0.0, sum_sq / static_cast<double>(samples) - out.value * out.value);
    out.std_error = std::sqrt(var / static_cast<double>(samples - 1));
  }
  const double exact = cost_bundle(plant, gain).J;
  out.bias_bound = std::pow(rho, 2.0 * static_cast<double>(horizon)) * exact /
                   (1.0 - rho * rho);
  return out;
}

}  // namespace soflq
