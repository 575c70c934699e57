#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "soflq/errors.hpp"
#include "soflq/numeric_policy.hpp"

namespace soflq {

inline void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + " has non-finite entries");
  }
}

inline void require_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + " must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

/// max |M(i,j) - M(j,i)| over all entry pairs.
inline double max_asymmetry(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline bool is_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  return max_asymmetry(m) <= numeric_policy().symmetry_slack * std::max(1.0, m.norm());
}

inline void require_symmetric(const Eigen::MatrixXd& m, const char* what) {
  require_square(m, what);
  require_finite(m, what);
  if (!is_symmetric(m)) {
    throw SymmetryError(std::string(what) + " is not symmetric: max asymmetry " +
                        std::to_string(max_asymmetry(m)));
  }
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

/// Largest |eigenvalue| of a square real matrix, via the full (QR-type)
/// eigenvalue decomposition so rotation-like and defective spectra are handled.
inline double spectral_radius(const Eigen::MatrixXd& m) {
  require_square(m, "spectral_radius input");
  require_finite(m, "spectral_radius input");
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue iteration did not converge on a " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix (norm " + std::to_string(m.norm()) + ")");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Largest singular value (the paper-style operator norm).
inline double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  require_finite(m, "spectral_norm input");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

inline double min_singular_value(const Eigen::MatrixXd& m) {
  require_finite(m, "min_singular_value input");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(std::min(m.rows(), m.cols()) - 1);
}

struct SymEigExtremes {
  double lambda_min;
  double lambda_max;
  double sigma_min;  // min |lambda|, the minimal singular value of a symmetric matrix
};

inline SymEigExtremes sym_eig_extremes(const Eigen::MatrixXd& m) {
  require_symmetric(m, "sym_eig_extremes input");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.compute(symmetrize(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("symmetric eigenvalue iteration did not converge");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1), ev.cwiseAbs().minCoeff()};
}

namespace detail {

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Direct solve of P = W + F^T P F through (I - F^T (x) F^T) vec(P) = vec(W).
inline Eigen::MatrixXd solve_lyapunov_kron(const Eigen::MatrixXd& f,
                                           const Eigen::MatrixXd& w) {
  const Eigen::Index n = f.rows();
  const Eigen::MatrixXd ft = f.transpose();
  Eigen::MatrixXd system = -kron(ft, ft);
  system.diagonal().array() += 1.0;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(w.data(), n * n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const Eigen::VectorXd sol = lu.solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, n);
}

/// Squared-iterate doubling: P_{k+1} = P_k + F_k^T P_k F_k, F_{k+1} = F_k^2.
inline Eigen::MatrixXd solve_lyapunov_smith(const Eigen::MatrixXd& f,
                                            const Eigen::MatrixXd& w) {
  Eigen::MatrixXd p = w;
  Eigen::MatrixXd fk = f;
  for (int iter = 0; iter < 1000; ++iter) {
    const Eigen::MatrixXd update = fk.transpose() * p * fk;
    p += update;
    if (update.norm() <= 2.3e-16 * std::max(1.0, p.norm())) {
      return p;
    }
    fk = (fk * fk).eval();
  }
  throw NumericalError("Lyapunov doubling iteration did not converge");
}

inline void check_lyapunov_residual(const Eigen::MatrixXd& f, const Eigen::MatrixXd& w,
                                    const Eigen::MatrixXd& p) {
  const double residual = (p - w - f.transpose() * p * f).norm();
  const double bound = numeric_policy().lyapunov_residual_tol * std::max(1.0, p.norm());
  if (!(residual <= bound) || !p.allFinite()) {
    throw NumericalError("Lyapunov solve residual " + std::to_string(residual) +
                         " exceeds " + std::to_string(bound) +
                         " (near-singular system)");
  }
}

}  // namespace detail

/// Solves the discrete Lyapunov equation P = W + F^T P F for rho(F) < 1.
/// The result is symmetrized and its residual verified.
inline Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& f,
                                               const Eigen::MatrixXd& w) {
  require_square(f, "Lyapunov coefficient");
  require_finite(f, "Lyapunov coefficient");
  require_symmetric(w, "Lyapunov right-hand side");
  if (f.rows() != w.rows()) {
    throw DimensionError("Lyapunov coefficient and right-hand side sizes differ");
  }
  const double rho = spectral_radius(f);
  if (rho >= 1.0) {
    throw InstabilityError(
        "Lyapunov coefficient has spectral radius " + std::to_string(rho) + " >= 1",
        rho);
  }
  Eigen::MatrixXd p = (f.rows() <= numeric_policy().kron_max_dim)
                          ? detail::solve_lyapunov_kron(f, w)
                          : detail::solve_lyapunov_smith(f, w);
  p = symmetrize(p);
  detail::check_lyapunov_residual(f, w, p);
  return p;
}

}  // namespace soflq
