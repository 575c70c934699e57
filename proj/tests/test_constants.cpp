#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "soflq/constants.hpp"
#include "soflq/instances.hpp"

using Eigen::MatrixXd;
using namespace soflq;

namespace {

PlantSpec s1() { return PlantSpec::scalar(0.5, 1.0, 1.0, 1.0, 1.0, 1.0); }

MatrixXd scalar_gain(double k) {
  MatrixXd out(1, 1);
  out << k;
  return out;
}

}  // namespace

TEST_CASE("constants on the scalar instance at alpha = J(0)") {
  const SublevelConstants constants = landscape_constants(s1(), 4.0 / 3.0);
  CHECK(constants.zeta1 == Catch::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(constants.L == Catch::Approx(680.0 / 27.0).epsilon(1e-12));
  CHECK(constants.q3 ==
        Catch::Approx((2.0 * std::sqrt(7.0) + 2.0) / 3.0).epsilon(1e-12));
  CHECK(constants.gamma_bar ==
        Catch::Approx(0.5 + (2.0 * std::sqrt(7.0) + 2.0) / 3.0).epsilon(1e-12));
  CHECK(constants.mu == 1.0);

  // sanity: L dominates the observed curvature 296/27
  CHECK(constants.L >= 296.0 / 27.0);

  CHECK(constants.zeta2 > 0.0);
  CHECK(constants.zeta3 > 0.0);
  CHECK(constants.zeta4 > 0.0);
  CHECK(constants.M > 0.0);

  CHECK_THROWS_AS(landscape_constants(s1(), 0.0), DomainError);
  CHECK_THROWS_AS(landscape_constants(s1(), -1.0), DomainError);
}

TEST_CASE("L and M are monotone in alpha") {
  for (std::uint64_t seed = 10; seed < 25; ++seed) {
    const BenchmarkInstance instance = random_instance(seed);
    const double alpha = cost_bundle(instance.plant, instance.K0).J;
    const SublevelConstants at1 = landscape_constants(instance.plant, alpha);
    const SublevelConstants at2 = landscape_constants(instance.plant, 2.0 * alpha);
    CHECK(at2.L >= at1.L);
    CHECK(at2.M >= at1.M);
  }
}

TEST_CASE("bound audit on closed-form cases") {
  const PlantSpec plant = s1();

  SECTION("scalar case collapses the P bound to equality") {
    const auto checks = bound_audit(plant, scalar_gain(0.0), 4.0 / 3.0);
    for (const auto& check : checks) {
      INFO(check.name << ": lhs=" << check.lhs << " rhs=" << check.rhs);
      CHECK(check.pass);
    }
    const auto& p_bound = checks.at(0);
    CHECK(p_bound.name == "P_norm_le_J_over_mu");
    CHECK(p_bound.lhs == Catch::Approx(p_bound.rhs).epsilon(1e-12));

    const auto& hess = checks.at(3);
    CHECK(hess.name == "hessian_norm_le_L");
    CHECK(hess.lhs == Catch::Approx(296.0 / 27.0).epsilon(1e-10));
    CHECK(hess.rhs == Catch::Approx(680.0 / 27.0).epsilon(1e-10));
  }

  SECTION("zero gain satisfies the KC bound trivially") {
    const MatrixXd identity = MatrixXd::Identity(2, 2);
    const PlantSpec decoupled(MatrixXd::Zero(2, 2), identity, identity, identity,
                              identity, identity);
    const auto checks = bound_audit(decoupled, MatrixXd::Zero(2, 2), 2.0);
    const auto& kc = checks.at(2);
    CHECK(kc.name == "KC_norm_le_q3");
    CHECK(kc.lhs == 0.0);
    CHECK(kc.pass);
  }

  SECTION("sublevel violation is rejected") {
    CHECK_THROWS_AS(bound_audit(plant, scalar_gain(0.0), 1.0), SublevelError);
  }
}

TEST_CASE("bound lemmas hold on random instances") {
  int audited = 0;
  for (std::uint64_t seed = 1000; seed < 1050; ++seed) {
    const BenchmarkInstance instance = random_instance(seed);
    const MatrixXd gain =
        random_stabilizing_gain(instance.plant, derive_seed(seed, 11), 0.3, 0.95);
    const double alpha = cost_bundle(instance.plant, gain).J;
    for (const auto& check : bound_audit(instance.plant, gain, alpha)) {
      INFO("seed " << seed << " " << check.name << ": lhs=" << check.lhs
                   << " rhs=" << check.rhs);
      CHECK(check.pass);
      ++audited;
    }
  }
  CHECK(audited >= 200);
}

TEST_CASE("sampled curvature stays below L over the sublevel set") {
  for (std::uint64_t seed = 2000; seed < 2010; ++seed) {
    const BenchmarkInstance instance = random_instance(seed);
    const PlantSpec& plant = instance.plant;
    const double alpha = 2.0 * cost_bundle(plant, instance.K0).J;
    const SublevelConstants constants = landscape_constants(plant, alpha);

    Rng rng(derive_seed(seed, 21));
    int sampled = 0;
    for (int trial = 0; trial < 20 && sampled < 5; ++trial) {
      const MatrixXd gain =
          instance.K0 + 0.2 * rng.gaussian(plant.m(), plant.d());
      if (!is_stabilizing(plant, gain)) continue;
      const CostBundle bundle = cost_bundle(plant, gain);
      if (bundle.J > alpha) continue;
      ++sampled;
      for (int direction = 0; direction < 50; ++direction) {
        const MatrixXd z = rng.sphere_direction(plant.m(), plant.d());
        const double quad = hessian_quadratic(plant, gain, bundle, z);
        CHECK(std::abs(quad) <= constants.L * (1.0 + 1e-9));
      }
    }
    CHECK(sampled > 0);
  }
}

TEST_CASE("Hessian difference obeys the Lipschitz constant") {
  int checked = 0;
  for (std::uint64_t seed = 3000; seed < 3040 && checked < 25; ++seed) {
    const BenchmarkInstance instance = random_instance(seed);
    const PlantSpec& plant = instance.plant;
    const double alpha = 2.0 * cost_bundle(plant, instance.K0).J;

    Rng rng(derive_seed(seed, 22));
    const MatrixXd from = instance.K0 + 0.05 * rng.gaussian(plant.m(), plant.d());
    const MatrixXd to = instance.K0 + 0.05 * rng.gaussian(plant.m(), plant.d());

    // require the whole sampled segment inside the sublevel set
    bool inside = true;
    for (int step = 0; step <= 11 && inside; ++step) {
      const MatrixXd point = from + (to - from) * (static_cast<double>(step) / 11.0);
      inside = is_stabilizing(plant, point) && cost_bundle(plant, point).J <= alpha;
    }
    if (!inside) continue;

    const SublevelConstants constants = landscape_constants(plant, alpha);
    const double lhs =
        spectral_norm(full_hessian(plant, from) - full_hessian(plant, to));
    const double rhs = constants.M * spectral_norm(from - to);
    INFO("seed " << seed << ": |H-H'| = " << lhs << ", M |K-K'| = " << rhs);
    CHECK(lhs <= rhs * (1.0 + 1e-9));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("gradient dominance bounds on square invertible C") {
  InstanceOptions options;
  options.c_square = true;
  for (std::uint64_t seed = 4000; seed < 4020; ++seed) {
    const BenchmarkInstance instance = random_instance(seed, options);
    const MatrixXd gain =
        random_stabilizing_gain(instance.plant, derive_seed(seed, 23), 0.3, 0.95);
    const double alpha = cost_bundle(instance.plant, gain).J;
    const auto checks = bound_audit(instance.plant, gain, alpha);
    REQUIRE(checks.size() == 7);
    for (const auto& check : checks) {
      INFO("seed " << seed << " " << check.name << ": lhs=" << check.lhs
                   << " rhs=" << check.rhs);
      CHECK(check.pass);
    }
  }
}
