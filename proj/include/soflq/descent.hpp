#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "soflq/constants.hpp"
#include "soflq/cost.hpp"
#include "soflq/errors.hpp"
#include "soflq/oracle.hpp"
#include "soflq/plant.hpp"

namespace soflq {

enum class DescentMode {
  Certified,   // fixed step eta <= 1/L, the theorem regime
  LineSearch,  // Armijo backtracking with a stabilizability guard
};

struct ArmijoParams {
  double shrink = 0.5;
  double slope = 1e-4;
};

struct DescentConfig {
  DescentMode mode = DescentMode::LineSearch;
  /// Step size; empty means 1/L evaluated at alpha = J(K0).
  std::optional<double> eta;
  /// Stop once |grad J|_F <= epsilon.
  double epsilon = 1e-6;
  long long max_iters = 100000;
  ArmijoParams armijo;
  /// Keep a copy of every iterate's gain in the trace.
  bool record_gains = true;
};

enum class DescentStatus {
  EpsilonReached,
  MaxIters,
  InstabilityGuard,
};

inline const char* to_string(DescentStatus status) {
  switch (status) {
    case DescentStatus::EpsilonReached: return "epsilon_reached";
    case DescentStatus::MaxIters: return "max_iters";
    case DescentStatus::InstabilityGuard: return "instability_guard";
  }
  return "unknown";
}

/// One iterate. eta is the step taken from this iterate (0 for the terminal
/// one). est_J / est_gradnorm are NaN unless filled by the model-free driver.
struct DescentRecord {
  long long iter = 0;
  double J = 0.0;
  double grad_fro = 0.0;
  double rho = 0.0;
  double eta = 0.0;
  double est_J = std::numeric_limits<double>::quiet_NaN();
  double est_gradnorm = std::numeric_limits<double>::quiet_NaN();
};

struct DescentTrace {
  std::vector<DescentRecord> records;
  std::vector<Eigen::MatrixXd> gains;  // aligned with records when recorded
  Eigen::MatrixXd final_gain;
  DescentStatus status = DescentStatus::MaxIters;
  bool has_estimates = false;
};

/// Iteration count ceil(2 alpha / (eta epsilon^2)) guaranteeing an
/// epsilon-stationary point under certified steps.
inline long long iteration_budget(double alpha, double eta, double epsilon) {
  if (!(alpha > 0.0) || !(eta > 0.0) || !(epsilon > 0.0)) {
    throw DomainError("iteration_budget: alpha, eta, epsilon must all be positive");
  }
  const double raw = std::ceil(2.0 * alpha / (eta * epsilon * epsilon));
  if (!(raw < 9.0e18)) return std::numeric_limits<long long>::max();
  return static_cast<long long>(raw);
}

/// Gradient descent K <- K - eta grad J(K). Certified mode enforces
/// eta <= 1/L and trusts the monotone-descent guarantee, still guarding each
/// candidate; line-search mode backtracks on instability or insufficient
/// decrease.
inline DescentTrace run_gd(const PlantSpec& plant, const Eigen::MatrixXd& start_gain,
                           const DescentConfig& config) {
  require_gain_shape(plant, start_gain, "K0");
  if (!(config.epsilon > 0.0)) throw DomainError("descent epsilon must be positive");
  if (config.max_iters < 0) throw DomainError("max_iters must be nonnegative");
  if (config.eta && !(*config.eta > 0.0)) {
    throw DomainError("descent eta must be positive");
  }
  {
    const double rho = closed_loop_radius(plant, start_gain);
    detail::require_stabilizing(rho, "run_gd at K0");
  }

  CostBundle bundle = cost_bundle(plant, start_gain);
  double eta = 0.0;
  if (config.mode == DescentMode::Certified || !config.eta) {
    const double inv_l = 1.0 / landscape_constants(plant, bundle.J).L;
    if (config.mode == DescentMode::Certified && config.eta &&
        *config.eta > inv_l * (1.0 + 1e-12)) {
      throw DomainError("certified mode requires eta <= 1/L = " +
                        std::to_string(inv_l) + ", got " + std::to_string(*config.eta));
    }
    eta = config.eta ? *config.eta : inv_l;
  } else {
    eta = *config.eta;
  }

  DescentTrace trace;
  trace.has_estimates = false;
  Eigen::MatrixXd gain = start_gain;
  double warm_step = eta;

  auto push_record = [&](long long iter, double step_taken, const Eigen::MatrixXd& grad) {
    trace.records.push_back(
        {iter, bundle.J, grad.norm(), bundle.rho, step_taken});
    if (config.record_gains) trace.gains.push_back(gain);
  };

  for (long long iter = 0;; ++iter) {
    const Eigen::MatrixXd grad = gradient(plant, bundle);
    const double gradnorm = grad.norm();

    if (gradnorm <= config.epsilon) {
      push_record(iter, 0.0, grad);
      trace.status = DescentStatus::EpsilonReached;
      break;
    }
    if (iter >= config.max_iters) {
      push_record(iter, 0.0, grad);
      trace.status = DescentStatus::MaxIters;
      break;
    }

    if (config.mode == DescentMode::Certified) {
      const Eigen::MatrixXd candidate = gain - eta * grad;
      if (!is_stabilizing(plant, candidate)) {
        push_record(iter, 0.0, grad);
        trace.status = DescentStatus::InstabilityGuard;
        break;
      }
      const CostBundle next = cost_bundle(plant, candidate);
      const double guaranteed =
          bundle.J - 0.5 * eta * gradnorm * gradnorm + 1e-9 * std::max(1.0, bundle.J);
      if (next.J > guaranteed) {
        push_record(iter, 0.0, grad);
        trace.status = DescentStatus::InstabilityGuard;
        break;
      }
      push_record(iter, eta, grad);
      gain = candidate;
      bundle = next;
    } else {
      double step = std::min(2.0 * warm_step, 1e6 * eta);
      if (!(step > 0.0)) step = eta;
      bool accepted = false;
      for (int halving = 0; halving < 200; ++halving) {
        const Eigen::MatrixXd candidate = gain - step * grad;
        if (is_stabilizing(plant, candidate)) {
          const CostBundle next = cost_bundle(plant, candidate);
          if (next.J <=
              bundle.J - config.armijo.slope * step * gradnorm * gradnorm) {
            push_record(iter, step, grad);
            gain = candidate;
            bundle = next;
            warm_step = step;
            accepted = true;
            break;
          }
        }
        step *= config.armijo.shrink;
      }
      if (!accepted) {
        push_record(iter, 0.0, grad);
        trace.status = DescentStatus::MaxIters;
        break;
      }
    }
  }
  trace.final_gain = gain;
  return trace;
}

/// Iterations guaranteeing J(K_N) - J_s* <= eps_J under gradient dominance
/// (C square invertible): ceil(|Sigma*| / (2 eta mu^2 smin(C)^2 smin(R))
/// log((J0 - J_s*) / eps_J)).
inline long long linear_rate_budget(const PlantSpec& plant, double eta, double j0,
                                    double eps_j) {
  if (!plant.c_square_invertible()) {
    throw ApplicabilityError(
        "linear_rate_budget requires C square with full rank (d == n)");
  }
  if (!(eta > 0.0) || !(eps_j > 0.0)) {
    throw DomainError("linear_rate_budget: eta and eps_J must be positive");
  }
  const RiccatiSolution riccati = dare_optimal_gain(plant);
  const Eigen::MatrixXd optimum = riccati.K_s_star * plant.C().inverse();
  const double sigma_star_norm = spectral_norm(cost_bundle(plant, optimum).Sigma);
  const double smin_c = min_singular_value(plant.C());
  const double smin_r = sym_eig_extremes(plant.R()).lambda_min;
  const double mu = plant.mu();

  const double gap0 = j0 - riccati.J_s_star;
  if (!(gap0 > eps_j)) return 0;
  const double coeff =
      sigma_star_norm / (2.0 * eta * mu * mu * smin_c * smin_c * smin_r);
  const double raw = std::ceil(coeff * std::log(gap0 / eps_j));
  if (!(raw < 9.0e18)) return std::numeric_limits<long long>::max();
  return std::max<long long>(0, static_cast<long long>(raw));
}

/// Local linear-rate certificate around an (approximately) stationary gain
/// with positive definite Hessian.
struct LocalCertificate {
  double l = 0.0;             // lambda_min of the Hessian at K-dagger
  double r_bar = 0.0;         // 2 l / M(alpha)
  double r0 = 0.0;            // |K0 - K-dagger|_F
  double eta = 0.0;           // 1 / L(alpha)
  double predicted_factor = 0.0;  // 1 / (1 + eta l)
  bool applicable = false;    // r0 < r_bar
};

inline LocalCertificate local_convergence_certificate(const PlantSpec& plant,
                                                      const Eigen::MatrixXd& stationary,
                                                      const Eigen::MatrixXd& start_gain,
                                                      double alpha) {
  require_gain_shape(plant, stationary, "K-dagger");
  require_gain_shape(plant, start_gain, "K0");
  const double gradnorm = gradient(plant, stationary).norm();
  if (!(gradnorm <= 1e-8)) {
    throw NotStationaryError("local certificate requires |grad J|_F <= 1e-8, got " +
                             std::to_string(gradnorm),
                             gradnorm);
  }
  const Eigen::MatrixXd hessian = full_hessian(plant, stationary);
  const double l = sym_eig_extremes(hessian).lambda_min;
  if (!(l > 0.0)) {
    throw SaddleError("Hessian at K-dagger is not positive definite: lambda_min = " +
                      std::to_string(l));
  }
  const SublevelConstants constants = landscape_constants(plant, alpha);

  LocalCertificate cert;
  cert.l = l;
  cert.r_bar = 2.0 * l / constants.M;
  cert.r0 = (start_gain - stationary).norm();
  cert.eta = 1.0 / constants.L;
  cert.predicted_factor = 1.0 / (1.0 + cert.eta * l);
  cert.applicable = cert.r0 < cert.r_bar;
  return cert;
}

}  // namespace soflq
