#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>

#include "soflq/errors.hpp"
#include "soflq/matrix_ops.hpp"
#include "soflq/numeric_policy.hpp"

namespace soflq {

/// Discrete-time plant x+ = Ax + Bu, y = Cx with quadratic stage cost
/// x'Qx + u'Ru and initial-state second moment X0. Construction validates
/// every invariant and symmetrizes the symmetric blocks; instances are
/// immutable values afterwards.
class PlantSpec {
 public:
  PlantSpec(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
            Eigen::MatrixXd Q, Eigen::MatrixXd R, Eigen::MatrixXd X0)
      : A_(std::move(A)),
        B_(std::move(B)),
        C_(std::move(C)),
        Q_(std::move(Q)),
        R_(std::move(R)),
        X0_(std::move(X0)) {
    validate();
  }

  static PlantSpec scalar(double a, double b, double c, double q, double r,
                          double x0) {
    auto m = [](double v) {
      Eigen::MatrixXd out(1, 1);
      out(0, 0) = v;
      return out;
    };
    return PlantSpec(m(a), m(b), m(c), m(q), m(r), m(x0));
  }

  /// Same dynamics and cost, different initial-state second moment.
  PlantSpec with_initial_moment(const Eigen::MatrixXd& X0) const {
    return PlantSpec(A_, B_, C_, Q_, R_, X0);
  }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& R() const { return R_; }
  const Eigen::MatrixXd& X0() const { return X0_; }

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  int d() const { return static_cast<int>(C_.rows()); }

  /// sigma_min(X0); strictly positive by the construction invariant.
  double mu() const { return mu_; }

  /// True when d == n and C is invertible, the regime where gradient
  /// dominance ties the SOF optimum to the state-feedback one.
  bool c_square_invertible() const { return c_square_invertible_; }

 private:
  void validate() {
    const auto n = A_.rows();
    if (A_.rows() != A_.cols() || n == 0) {
      throw InvalidPlantError("plant.A must be square and nonempty");
    }
    if (B_.rows() != n || B_.cols() == 0) {
      throw InvalidPlantError("plant.B must have " + std::to_string(n) +
                              " rows and at least one column");
    }
    if (C_.cols() != n || C_.rows() == 0) {
      throw InvalidPlantError("plant.C must have " + std::to_string(n) +
                              " columns and at least one row");
    }
    if (C_.rows() > n) {
      throw InvalidPlantError("plant.C cannot have more rows than states");
    }
    if (Q_.rows() != n || Q_.cols() != n) {
      throw InvalidPlantError("plant.Q must be " + std::to_string(n) + "x" +
                              std::to_string(n));
    }
    if (R_.rows() != B_.cols() || R_.cols() != B_.cols()) {
      throw InvalidPlantError("plant.R must be " + std::to_string(B_.cols()) + "x" +
                              std::to_string(B_.cols()));
    }
    if (X0_.rows() != n || X0_.cols() != n) {
      throw InvalidPlantError("plant.X0 must be " + std::to_string(n) + "x" +
                              std::to_string(n));
    }
    for (const auto* entry : {&A_, &B_, &C_, &Q_, &R_, &X0_}) {
      if (!entry->allFinite()) {
        throw InvalidPlantError("plant matrices must have finite entries");
      }
    }
    const double pd_tol = numeric_policy().pd_tolerance;

    check_symmetric(Q_, "plant.Q");
    Q_ = symmetrize(Q_);
    const double q_min = sym_eig_extremes(Q_).lambda_min;
    if (!(q_min > pd_tol)) {
      throw InvalidPlantError("plant.Q is not positive definite: lambda_min = " +
                              std::to_string(q_min));
    }

    check_symmetric(R_, "plant.R");
    R_ = symmetrize(R_);
    const double r_min = sym_eig_extremes(R_).lambda_min;
    if (!(r_min > pd_tol)) {
      throw InvalidPlantError("plant.R is not positive definite: lambda_min = " +
                              std::to_string(r_min));
    }

    check_symmetric(X0_, "plant.X0");
    X0_ = symmetrize(X0_);
    mu_ = sym_eig_extremes(X0_).lambda_min;
    if (!(mu_ > pd_tol)) {
      throw InvalidPlantError(
          "plant.X0 must have mu = sigma_min(X0) > 0, got lambda_min = " +
          std::to_string(mu_));
    }

    const double cc_min = sym_eig_extremes(symmetrize(C_ * C_.transpose())).lambda_min;
    if (!(cc_min > pd_tol)) {
      throw InvalidPlantError("plant.C must have full row rank: sigma_min(C C') = " +
                              std::to_string(cc_min));
    }
    c_square_invertible_ = (C_.rows() == n);
  }

  static void check_symmetric(const Eigen::MatrixXd& m, const char* what) {
    if (!is_symmetric(m)) {
      throw InvalidPlantError(std::string(what) + " must be symmetric; max asymmetry " +
                              std::to_string(max_asymmetry(m)));
    }
  }

  Eigen::MatrixXd A_, B_, C_, Q_, R_, X0_;
  double mu_ = 0.0;
  bool c_square_invertible_ = false;
};

/// Everything the cost evaluators produce at one stabilizing gain:
/// value matrix P, state correlation Sigma, gain-error factor
/// E = (R + B'PB)KC - B'PA, the cost J = tr(P X0), and the closed-loop
/// spectral radius.
struct CostBundle {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Sigma;
  Eigen::MatrixXd E;
  double J = 0.0;
  double rho = 0.0;
};

}  // namespace soflq
