#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "soflq/errors.hpp"
#include "soflq/matrix_ops.hpp"
#include "soflq/numeric_policy.hpp"
#include "soflq/plant.hpp"

namespace soflq {

inline void require_gain_shape(const PlantSpec& plant, const Eigen::MatrixXd& gain,
                               const char* what = "gain") {
  if (gain.rows() != plant.m() || gain.cols() != plant.d()) {
    throw DimensionError(std::string(what) + " must be " + std::to_string(plant.m()) +
                         "x" + std::to_string(plant.d()) + ", got " +
                         std::to_string(gain.rows()) + "x" +
                         std::to_string(gain.cols()));
  }
  require_finite(gain, what);
}

inline Eigen::MatrixXd closed_loop(const PlantSpec& plant, const Eigen::MatrixXd& gain) {
  require_gain_shape(plant, gain);
  return plant.A() - plant.B() * gain * plant.C();
}

inline double closed_loop_radius(const PlantSpec& plant, const Eigen::MatrixXd& gain) {
  return spectral_radius(closed_loop(plant, gain));
}

inline bool is_stabilizing(const PlantSpec& plant, const Eigen::MatrixXd& gain) {
  return closed_loop_radius(plant, gain) < 1.0 - numeric_policy().stability_margin;
}

namespace detail {

inline void require_stabilizing(double rho, const char* who) {
  if (!(rho < 1.0 - numeric_policy().stability_margin)) {
    throw InstabilityError(std::string(who) + ": closed loop has spectral radius " +
                           std::to_string(rho) + " (not stabilizing)",
                           rho);
  }
}

}  // namespace detail

/// Exact cost data at a stabilizing gain. P and Sigma solve their Lyapunov
/// equations through one shared factorization; both are symmetrized and
/// residual-checked.
inline CostBundle cost_bundle(const PlantSpec& plant, const Eigen::MatrixXd& gain) {
  const Eigen::MatrixXd f = closed_loop(plant, gain);
  const double rho = spectral_radius(f);
  detail::require_stabilizing(rho, "cost_bundle");

  const Eigen::MatrixXd kc = gain * plant.C();
  const Eigen::MatrixXd w = symmetrize(plant.Q() + kc.transpose() * plant.R() * kc);

  CostBundle out;
  out.rho = rho;
  const Eigen::Index n = f.rows();
  if (n <= numeric_policy().kron_max_dim) {
    // One LU serves both equations: the Sigma system matrix is the transpose
    // of the P system matrix.
    const Eigen::MatrixXd ft = f.transpose();
    Eigen::MatrixXd system = -detail::kron(ft, ft);
    system.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);

    const Eigen::VectorXd vec_w = Eigen::Map<const Eigen::VectorXd>(w.data(), n * n);
    const Eigen::VectorXd vec_p = lu.solve(vec_w);
    out.P = symmetrize(Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), n, n));

    const Eigen::VectorXd vec_x0 =
        Eigen::Map<const Eigen::VectorXd>(plant.X0().data(), n * n);
    const Eigen::VectorXd vec_sigma = lu.transpose().solve(vec_x0);
    out.Sigma = symmetrize(Eigen::Map<const Eigen::MatrixXd>(vec_sigma.data(), n, n));

    detail::check_lyapunov_residual(f, w, out.P);
    detail::check_lyapunov_residual(f.transpose(), plant.X0(), out.Sigma);
  } else {
    out.P = solve_discrete_lyapunov(f, w);
    out.Sigma = solve_discrete_lyapunov(f.transpose(), plant.X0());
  }

  out.E = (plant.R() + plant.B().transpose() * out.P * plant.B()) * kc -
          plant.B().transpose() * out.P * plant.A();
  out.J = (out.P * plant.X0()).trace();
  return out;
}

/// Policy gradient 2 E Sigma C' from an existing bundle.
inline Eigen::MatrixXd gradient(const PlantSpec& plant, const CostBundle& bundle) {
  return 2.0 * bundle.E * bundle.Sigma * plant.C().transpose();
}

inline Eigen::MatrixXd gradient(const PlantSpec& plant, const Eigen::MatrixXd& gain) {
  return gradient(plant, cost_bundle(plant, gain));
}

/// Directional derivative P'_K[Z] of the value matrix: the Lyapunov solution
/// with the closed loop as coefficient and forcing C'Z'E + E'ZC. Linear in Z.
inline Eigen::MatrixXd directional_value_derivative(const PlantSpec& plant,
                                                    const Eigen::MatrixXd& gain,
                                                    const CostBundle& bundle,
                                                    const Eigen::MatrixXd& direction) {
  require_gain_shape(plant, direction, "direction");
  const Eigen::MatrixXd f = closed_loop(plant, gain);
  const Eigen::MatrixXd cze = plant.C().transpose() * direction.transpose() * bundle.E;
  const Eigen::MatrixXd forcing = cze + cze.transpose();
  return solve_discrete_lyapunov(f, forcing);
}

inline Eigen::MatrixXd directional_value_derivative(const PlantSpec& plant,
                                                    const Eigen::MatrixXd& gain,
                                                    const Eigen::MatrixXd& direction) {
  return directional_value_derivative(plant, gain, cost_bundle(plant, gain), direction);
}

/// Hessian quadratic form
///   2 tr(C'Z'(R + B'PB)ZC Sigma) - 4 tr((BZC)' P'_K[Z] (A - BKC) Sigma).
inline double hessian_quadratic(const PlantSpec& plant, const Eigen::MatrixXd& gain,
                                const CostBundle& bundle,
                                const Eigen::MatrixXd& direction) {
  require_gain_shape(plant, direction, "direction");
  const Eigen::MatrixXd zc = direction * plant.C();
  const Eigen::MatrixXd inner =
      plant.R() + plant.B().transpose() * bundle.P * plant.B();
  const double term1 =
      2.0 * (inner * zc * bundle.Sigma * zc.transpose()).trace();

  const Eigen::MatrixXd p_prime =
      directional_value_derivative(plant, gain, bundle, direction);
  const Eigen::MatrixXd f = closed_loop(plant, gain);
  const double term2 =
      4.0 * ((plant.B() * zc).transpose() * p_prime * f * bundle.Sigma).trace();
  return term1 - term2;
}

inline double hessian_quadratic(const PlantSpec& plant, const Eigen::MatrixXd& gain,
                                const Eigen::MatrixXd& direction) {
  return hessian_quadratic(plant, gain, cost_bundle(plant, gain), direction);
}

/// Dense (m*d)x(m*d) Hessian in column-major vec ordering, assembled by
/// polarization of the quadratic form over basis directions.
inline Eigen::MatrixXd full_hessian(const PlantSpec& plant, const Eigen::MatrixXd& gain) {
  const int dim = plant.m() * plant.d();
  if (dim > numeric_policy().hessian_dim_cap) {
    throw SizeError("full Hessian dimension " + std::to_string(dim) + " exceeds cap " +
                    std::to_string(numeric_policy().hessian_dim_cap));
  }
  const CostBundle bundle = cost_bundle(plant, gain);
  auto quad = [&](const Eigen::MatrixXd& z) {
    return hessian_quadratic(plant, gain, bundle, z);
  };
  auto basis = [&](int idx) {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(plant.m(), plant.d());
    z(idx % plant.m(), idx / plant.m()) = 1.0;  // column-major vec ordering
    return z;
  };

  Eigen::MatrixXd hessian(dim, dim);
  for (int a = 0; a < dim; ++a) {
    const Eigen::MatrixXd ea = basis(a);
    hessian(a, a) = quad(ea);
    for (int b = a + 1; b < dim; ++b) {
      const Eigen::MatrixXd eb = basis(b);
      const double value = 0.25 * (quad(ea + eb) - quad(ea - eb));
      hessian(a, b) = value;
      hessian(b, a) = value;
    }
  }
  return hessian;
}

/// Right-hand side of the performance difference identity; equals
/// J(gain_to) - J(gain_from) exactly.
inline double performance_difference(const PlantSpec& plant,
                                     const Eigen::MatrixXd& gain_from,
                                     const Eigen::MatrixXd& gain_to) {
  require_gain_shape(plant, gain_from, "gain K");
  require_gain_shape(plant, gain_to, "gain K'");
  {
    const double rho = closed_loop_radius(plant, gain_from);
    detail::require_stabilizing(rho, "performance_difference at K");
  }
  {
    const double rho = closed_loop_radius(plant, gain_to);
    detail::require_stabilizing(rho, "performance_difference at K'");
  }
  const CostBundle at_from = cost_bundle(plant, gain_from);
  const CostBundle at_to = cost_bundle(plant, gain_to);
  const Eigen::MatrixXd delta = (gain_to - gain_from) * plant.C();
  const Eigen::MatrixXd inner =
      plant.R() + plant.B().transpose() * at_from.P * plant.B();
  return 2.0 * (at_to.Sigma * delta.transpose() * at_from.E).trace() +
         (at_to.Sigma * delta.transpose() * inner * delta).trace();
}

}  // namespace soflq
