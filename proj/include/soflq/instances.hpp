#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "soflq/cost.hpp"
#include "soflq/matrix_ops.hpp"
#include "soflq/plant.hpp"
#include "soflq/rng.hpp"

namespace soflq {

/// Knobs for the random benchmark generator. The defaults give mild,
/// well-conditioned plants whose landscape constants stay small enough for
/// certified step sizes to make visible progress.
struct InstanceOptions {
  int dim_cap = 5;        // n, m, d drawn from 1..dim_cap
  bool c_identity = false;
  bool c_square = false;  // d = n with invertible C
  double rho_lo = 0.3;    // open-loop spectral radius range
  double rho_hi = 0.85;
  double spd_spread = 0.5;  // size of the SPD perturbation on Q, R, X0
};

struct BenchmarkInstance {
  PlantSpec plant;
  Eigen::MatrixXd K0;
};

namespace detail {

inline Eigen::MatrixXd random_spd_bump(Rng& rng, int n, double spread) {
  const Eigen::MatrixXd g = rng.gaussian(n, n);
  Eigen::MatrixXd s = symmetrize(g * g.transpose());
  const double norm = spectral_norm(s);
  if (norm > 0.0) s *= spread / norm;
  return Eigen::MatrixXd::Identity(n, n) + s;
}

}  // namespace detail

/// Deterministic random plant with K0 = 0 stabilizing:
/// rho(A) is scaled into [rho_lo, rho_hi], B and C have unit spectral norm,
/// and Q, R, X0 are identity plus a small SPD bump.
inline BenchmarkInstance random_instance(std::uint64_t seed,
                                         const InstanceOptions& options = {}) {
  Rng rng(seed);
  const int n = 1 + static_cast<int>(rng.below(options.dim_cap));
  const int m = 1 + static_cast<int>(rng.below(options.dim_cap));
  int d = 1 + static_cast<int>(rng.below(std::min(options.dim_cap, n)));
  if (options.c_identity || options.c_square) d = n;

  Eigen::MatrixXd a = rng.gaussian(n, n);
  const double target_rho = rng.uniform(options.rho_lo, options.rho_hi);
  const double open_rho = spectral_radius(a);
  if (open_rho < 1e-9) {
    a = Eigen::MatrixXd::Identity(n, n) * target_rho;
  } else {
    a *= target_rho / open_rho;
  }

  Eigen::MatrixXd b = rng.gaussian(n, m);
  while (spectral_norm(b) < 1e-9) b = rng.gaussian(n, m);
  b /= spectral_norm(b);

  Eigen::MatrixXd c;
  if (options.c_identity) {
    c = Eigen::MatrixXd::Identity(n, n);
  } else {
    do {
      c = rng.gaussian(d, n);
      const double norm = spectral_norm(c);
      if (norm > 1e-9) c /= norm;
    } while (min_singular_value(c) < 0.05);
  }

  const Eigen::MatrixXd q = detail::random_spd_bump(rng, n, options.spd_spread);
  const Eigen::MatrixXd r = detail::random_spd_bump(rng, m, options.spd_spread);
  const Eigen::MatrixXd x0 = detail::random_spd_bump(rng, n, options.spd_spread);

  return {PlantSpec(a, b, c, q, r, x0), Eigen::MatrixXd::Zero(m, d)};
}

/// Random gain with closed-loop radius at most rho_cap, found by shrinking a
/// Gaussian draw around zero. Falls back to the zero gain (the generator's
/// plants are open-loop stable).
inline Eigen::MatrixXd random_stabilizing_gain(const PlantSpec& plant,
                                               std::uint64_t seed, double spread = 0.3,
                                               double rho_cap = 0.95) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 200; ++attempt) {
    const Eigen::MatrixXd k = spread * rng.gaussian(plant.m(), plant.d());
    if (closed_loop_radius(plant, k) <= rho_cap) return k;
    spread *= 0.7;
  }
  return Eigen::MatrixXd::Zero(plant.m(), plant.d());
}

}  // namespace soflq
