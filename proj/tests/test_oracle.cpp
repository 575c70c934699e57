#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "soflq/cost.hpp"
#include "soflq/instances.hpp"
#include "soflq/oracle.hpp"
#include "soflq/plant.hpp"

using Eigen::MatrixXd;
using namespace soflq;

namespace {

PlantSpec s1() { return PlantSpec::scalar(0.5, 1.0, 1.0, 1.0, 1.0, 1.0); }

MatrixXd scalar_gain(double k) {
  MatrixXd out(1, 1);
  out << k;
  return out;
}

// Closed-form S1 optimum: p is the positive root of p^2 - 0.25 p - 1 = 0
// (from the scalar Riccati recursion), k* = 0.5 p / (1 + p).
struct ScalarOptimum {
  double p;
  double k;
};

ScalarOptimum s1_optimum() {
  const double p = (0.25 + std::sqrt(0.25 * 0.25 + 4.0)) / 2.0;
  return {p, 0.5 * p / (1.0 + p)};
}

}  // namespace

TEST_CASE("finite-difference gradient oracle") {
  const PlantSpec plant = s1();
  const MatrixXd fd = fd_gradient(plant, scalar_gain(0.0), 1e-5);
  CHECK(fd(0, 0) == Catch::Approx(-16.0 / 9.0).margin(1e-6));

  const MatrixXd identity = MatrixXd::Identity(2, 2);
  const PlantSpec decoupled(MatrixXd::Zero(2, 2), identity, identity, identity,
                            identity, identity);
  CHECK(fd_gradient(decoupled, MatrixXd::Zero(2, 2)).norm() < 1e-9);

  // J is linear in X0, so doubling X0 doubles every FD entry exactly.
  const PlantSpec doubled = plant.with_initial_moment((2.0 * plant.X0()).eval());
  const MatrixXd fd2 = fd_gradient(doubled, scalar_gain(0.2), 1e-5);
  const MatrixXd fd1 = fd_gradient(plant, scalar_gain(0.2), 1e-5);
  CHECK((fd2 - 2.0 * fd1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite-difference Hessian oracle") {
  const PlantSpec plant = s1();
  CHECK(fd_hessian_quadratic(plant, scalar_gain(0.0), scalar_gain(1.0), 1e-4) ==
        Catch::Approx(296.0 / 27.0).epsilon(1e-5));
  CHECK(fd_hessian_quadratic(plant, scalar_gain(0.0), MatrixXd::Zero(1, 1), 1e-4) ==
        0.0);
}

TEST_CASE("Riccati value iteration") {
  SECTION("A = 0 gives the one-step cost") {
    const MatrixXd identity = MatrixXd::Identity(2, 2);
    MatrixXd q(2, 2);
    q << 2.0, 0.3, 0.3, 1.0;
    const PlantSpec plant(MatrixXd::Zero(2, 2), identity, identity, q, identity,
                          identity);
    const RiccatiSolution solution = dare_optimal_gain(plant);
    CHECK((solution.P_star - q).norm() < 1e-11);
    CHECK(solution.K_s_star.norm() < 1e-11);
    CHECK(solution.J_s_star == Catch::Approx(q.trace()).epsilon(1e-11));
  }

  SECTION("scalar closed form") {
    const RiccatiSolution solution = dare_optimal_gain(s1());
    const ScalarOptimum exact = s1_optimum();
    CHECK(solution.P_star(0, 0) == Catch::Approx(exact.p).epsilon(1e-10));
    CHECK(solution.K_s_star(0, 0) == Catch::Approx(exact.k).epsilon(1e-10));
    CHECK(solution.J_s_star == Catch::Approx(exact.p).epsilon(1e-10));
  }

  SECTION("E_K vanishes when KC equals the optimal state feedback") {
    const PlantSpec plant = s1();
    const RiccatiSolution solution = dare_optimal_gain(plant);
    const CostBundle bundle = cost_bundle(plant, solution.K_s_star);
    CHECK(bundle.E.norm() <= 1e-10);
    CHECK(gradient(plant, bundle).norm() <= 1e-8);
  }

  SECTION("residual invariant on random instances") {
    for (std::uint64_t seed = 600; seed < 620; ++seed) {
      const BenchmarkInstance instance = random_instance(seed);
      const RiccatiSolution solution = dare_optimal_gain(instance.plant);
      CHECK(solution.residual <= 1e-9 * std::max(1.0, solution.P_star.norm()));
      CHECK(spectral_radius(instance.plant.A() -
                            instance.plant.B() * solution.K_s_star) < 1.0);

      // state feedback is optimal: stationary for the C = I problem
      if (instance.plant.c_square_invertible()) {
        const MatrixXd sof_gain =
            solution.K_s_star * instance.plant.C().inverse();
        CHECK(gradient(instance.plant, sof_gain).norm() <= 1e-8);
      }
    }
  }
}

TEST_CASE("dominance audit") {
  const PlantSpec plant = s1();

  SECTION("at the optimum all bounds collapse to zero") {
    const RiccatiSolution solution = dare_optimal_gain(plant);
    const DominanceReport report = dominance_audit(plant, solution.K_s_star);
    REQUIRE(report.c_invertible);
    CHECK(report.eq17.pass);
    CHECK(report.eq18.pass);
    CHECK(report.eq19.pass);
    CHECK(std::abs(report.eq17.lhs) <= 1e-9);
    CHECK(std::abs(report.eq19.rhs) <= 1e-9);
  }

  SECTION("strict inequalities away from the optimum") {
    const DominanceReport report = dominance_audit(plant, scalar_gain(0.0));
    CHECK(report.eq17.pass);
    CHECK(report.eq18.pass);
    CHECK(report.eq19.pass);
    CHECK(report.eq17.lhs > 0.0);
    CHECK(report.eq17.lhs < report.eq17.rhs);
    CHECK(report.eq19.lhs > report.eq19.rhs);
  }

  SECTION("random invertible-C instances") {
    InstanceOptions options;
    options.c_square = true;
    for (std::uint64_t seed = 700; seed < 720; ++seed) {
      const BenchmarkInstance instance = random_instance(seed, options);
      const MatrixXd gain =
          random_stabilizing_gain(instance.plant, derive_seed(seed, 2), 0.3, 0.95);
      const DominanceReport report = dominance_audit(instance.plant, gain);
      CHECK(report.c_invertible);
      CHECK(report.eq17.pass);
      CHECK(report.eq18.pass);
      CHECK(report.eq19.pass);
    }
  }

  SECTION("rank-deficient C falls back to a descent-found optimum") {
    MatrixXd a(2, 2);
    a << 0.9, 0.1, 0.0, 0.8;
    MatrixXd c(1, 2);
    c << 1.0, 0.0;
    const PlantSpec plant2(a, MatrixXd::Identity(2, 2), c, MatrixXd::Identity(2, 2),
                           MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
    const DominanceReport report = dominance_audit(plant2, MatrixXd::Zero(2, 1));
    CHECK_FALSE(report.c_invertible);
    CHECK(report.approximate);
    CHECK(report.eq17.pass);
  }
}

TEST_CASE("Monte Carlo rollout cost") {
  const PlantSpec plant = s1();

  SECTION("one-step expectation is tr((Q + C'K'RKC) X0)") {
    const MatrixXd gain = scalar_gain(0.3);
    const RolloutEstimate estimate = rollout_cost(plant, gain, 1, 20000, 42);
    const double expected = 1.0 + 0.3 * 0.3;  // q + k^2 r with x0 = 1
    CHECK(std::abs(estimate.value - expected) <= 3.0 * estimate.std_error);
  }

  SECTION("long horizon converges to the exact cost") {
    const RolloutEstimate estimate = rollout_cost(plant, scalar_gain(0.0), 200, 100000, 7);
    CHECK(estimate.value == Catch::Approx(4.0 / 3.0).epsilon(0.01));
    CHECK(estimate.bias_bound <= 1e-3 * (4.0 / 3.0));
  }

  SECTION("deterministic given the seed") {
    const RolloutEstimate a = rollout_cost(plant, scalar_gain(0.1), 50, 500, 99);
    const RolloutEstimate b = rollout_cost(plant, scalar_gain(0.1), 50, 500, 99);
    CHECK(a.value == b.value);
  }

  SECTION("unstabilizing gain is an error, not a number") {
    CHECK_THROWS_AS(rollout_cost(plant, scalar_gain(2.0), 10, 10, 1), InstabilityError);
  }
}
