//! Tests for the channel-distance bound evaluators, the shot-count formulas,
//! and the query planner.  Closed-form values are pinned by independent
//! arithmetic; dominance and consistency properties are checked by Monte
//! Carlo over random instances.

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "symplearn/bounds.hpp"
#include "symplearn/rng.hpp"

#include <cmath>
#include <numbers>

using namespace symplearn;

namespace {

//! A symplectic matrix near s with a small additive perturbation, projected
//! back onto the group.
SymplecticMatrix nearby_symplectic(const SymplecticMatrix& s, double eps, Xoshiro256pp& rng) {
  RealMatrix e(s.dim(), s.dim());
  for (int i = 0; i < s.dim(); ++i)
    for (int j = 0; j < s.dim(); ++j) e(i, j) = rng.normal();
  e *= eps / operator_norm(e);
  return regularize(s.matrix() + e);
}

TEST_CASE("displacement channel distance bound") {
  RealVector r(4);
  r << 0.3, -1.0, 2.0, 0.5;
  CHECK(displacement_diamond_bound(r, r, 1.0) == 0.0);

  RealVector far = r;
  far(0) += 100.0;
  CHECK(displacement_diamond_bound(r, far, 1.0) == Catch::Approx(1.0));

  // n_bar = 1, ||r1 - r2|| = 0.1: sin((1 + sqrt2)/sqrt2 * 0.1).
  RealVector shifted = r;
  shifted(2) += 0.1;
  const double expected = std::sin((1.0 + std::sqrt(2.0)) / std::sqrt(2.0) * 0.1);
  CHECK(displacement_diamond_bound(r, shifted, 1.0) == Catch::Approx(expected).epsilon(1e-14));

  // Monotone along a ray until the cap.
  double prev = 0.0;
  for (double t : {0.01, 0.05, 0.1, 0.5, 1.0, 5.0}) {
    RealVector rt = r;
    rt(1) += t;
    const double val = displacement_diamond_bound(r, rt, 0.5);
    CHECK(val >= prev);
    prev = val;
  }

  CHECK_THROWS_AS(displacement_diamond_bound(r, RealVector::Zero(2), 1.0), InvalidArgument);
  CHECK_THROWS_AS(displacement_diamond_bound(r, r, -0.5), InvalidArgument);
}

TEST_CASE("g factor is small and increasing where it is used") {
  CHECK(diamond_g(2.0) <= 4.0);
  CHECK(diamond_g(2.0) == Catch::Approx(std::sqrt(std::numbers::pi / 3.0) + 2.0));
  double prev = diamond_g(1.0);
  for (double x = 1.25; x <= 10.0; x += 0.25) {
    const double val = diamond_g(x);
    CHECK(val > prev);
    prev = val;
  }
  CHECK_THROWS_AS(diamond_g(-1.0), InvalidArgument);
}

TEST_CASE("symplectic channel distance bound") {
  Xoshiro256pp rng(61);
  const SymplecticMatrix s = random_symplectic(2, 2.0, rng);
  CHECK(symplectic_diamond_bound(s, s, 1.0) == 0.0);

  // m = 1, S1 = diag(1.1, 1/1.1), S2 = identity, n_bar = 1: two-path value.
  RealMatrix d(2, 2);
  d << 1.1, 0.0, 0.0, 1.0 / 1.1;
  const SymplecticMatrix s1(d);
  const SymplecticMatrix id(RealMatrix::Identity(2, 2));
  const double frob = std::hypot(0.1, 1.0 - 1.0 / 1.1);
  const double expected = std::sqrt((std::sqrt(6.0) + std::sqrt(10.0) + 5.0 * std::sqrt(2.0)) * 2.0) *
                          (std::sqrt(std::numbers::pi / 2.1) + std::sqrt(2.2)) * std::sqrt(frob);
  CHECK(symplectic_diamond_bound(s1, id, 1.0) == Catch::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(symplectic_diamond_bound(s1, random_symplectic(2, 2.0, rng), 1.0),
                  InvalidArgument);
}

TEST_CASE("additive to multiplicative mismatch") {
  CHECK(additive_to_multiplicative(0.0, 3.0) == 0.0);
  CHECK(additive_to_multiplicative(0.1, 2.0) == Catch::Approx(0.4));
  CHECK_THROWS_AS(additive_to_multiplicative(0.25, 2.0), InvalidArgument);
  CHECK_THROWS_AS(additive_to_multiplicative(-0.1, 2.0), InvalidArgument);

  // Dominance: the returned value upper-bounds the measured mismatch.
  Xoshiro256pp rng(62);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_u64() % 2);
    const double z_max = 1.0 + 2.0 * rng.next_unit();
    const SymplecticMatrix s = random_symplectic(m, z_max, rng);
    // The projection inside nearby_symplectic can amplify the raw perturbation
    // by up to 9 z^2; divide by z^3 so z * eps_s stays below 1/2 by construction.
    const SymplecticMatrix st =
        nearby_symplectic(s, 0.01 / (z_max * z_max * z_max), rng);
    const double z = operator_norm(s.matrix());
    const double eps_s = operator_norm(st.matrix() - s.matrix());
    REQUIRE(z * eps_s < 0.5);
    const double measured = operator_norm(
        st.inverse() * s.matrix() - RealMatrix::Identity(s.dim(), s.dim()));
    CHECK(measured <= additive_to_multiplicative(eps_s, std::max(z, 1.0)) + 1e-12);
  }
}

TEST_CASE("combined bound: zeros, two-path value, and domain gate") {
  CHECK(combined_diamond_bound(0.0, 0.0, 2, 2.0, 1.0) == 0.0);

  // Independent arithmetic for (eps_S, eps_r, m, z, n_bar) = (1e-4, 1e-2, 2, 2, 1).
  const double two_m = 4.0;
  const double term1 = 6.0 * std::sqrt(9.0 * std::sqrt(two_m) * 2.0) *
                       std::sqrt(2.0 * std::sqrt(two_m) * 1e-4);
  const double term2 = std::sqrt(2.0) * std::sqrt(4.0 + 1.0) * 1e-2;
  CHECK(combined_diamond_bound(1e-4, 1e-2, 2, 2.0, 1.0) ==
        Catch::Approx(term1 + term2).epsilon(1e-13));

  CHECK_THROWS_AS(combined_diamond_bound(0.3, 0.0, 2, 2.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(combined_diamond_bound(0.01, 0.01, 0, 2.0, 1.0), InvalidArgument);
}

TEST_CASE("combined bound equals epsilon at the budget equalities") {
  for (int m : {1, 2, 4})
    for (double z : {1.0, 2.0, 4.0})
      for (double n_bar : {0.5, 1.0, 4.0})
        for (double eps : {0.1, 0.5}) {
          const double eps_s = eps * eps / (2592.0 * m * z * (n_bar + 1.0));
          const double eps_r = eps / (2.0 * std::sqrt(2.0) * std::sqrt(z * z * n_bar + 1.0));
          const double bound = combined_diamond_bound(eps_s, eps_r, m, z, n_bar);
          CHECK(bound == Catch::Approx(eps).epsilon(1e-12));
          CHECK(bound <= eps * (1.0 + 1e-12));
        }
}

TEST_CASE("combined bound dominates its own derivation chain") {
  Xoshiro256pp rng(63);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_u64() % 2);
    const double z = 1.5 + rng.next_unit();
    const SymplecticMatrix s = random_symplectic(m, z, rng);
    const SymplecticMatrix st = nearby_symplectic(s, 0.02 / (z * z * z), rng);
    RealVector r(2 * m), rt(2 * m);
    for (int i = 0; i < 2 * m; ++i) {
      r(i) = rng.normal();
      rt(i) = r(i) + 0.05 * rng.normal();
    }
    const double n_bar = 0.5 + 2.0 * rng.next_unit();
    const double eps_s = operator_norm(st.matrix() - s.matrix());
    const double eps_r = (rt - r).norm();
    REQUIRE(z * eps_s < 0.5);

    // The one-shot bound from parameter errors must dominate the sum of the
    // per-part bounds it was derived from (symplectic part at n_bar, shifted
    // displacement part at z^2 n_bar).
    const double combined = combined_diamond_bound(eps_s, eps_r, m, z, n_bar);
    const double parts = symplectic_diamond_bound(s, st, n_bar) +
                         displacement_diamond_bound(rt, r, z * z * n_bar);
    CHECK(combined + 1e-9 >= parts);
  }
}

TEST_CASE("clamping for reports") {
  CHECK(clamp_diamond_bound(1.7) == 1.0);
  CHECK(clamp_diamond_bound(0.3) == 0.3);
}

TEST_CASE("shot-count formulas: pinned arithmetic") {
  // Vacuum-shared raw design at (m=2, z=2, eta=4, eps=0.2, delta=0.1).
  const double chi_v = std::sqrt(4.0) + std::sqrt(2.0 * std::log(40.0));
  const double expected_v = 4.0 * 2.0 * 4.0 * chi_v * chi_v / (16.0 * 0.04);
  CHECK(symplectic_shot_bound(SymplecticVariant::vacuum_shared, 2, 2.0, 4.0, 0.2, 0.1) ==
        Catch::Approx(expected_v).epsilon(1e-13));
  CHECK(static_cast<std::uint64_t>(std::ceil(expected_v)) == 1113u);

  // Symmetric design, same parameters.
  const double chi_s = 2.0 * std::sqrt(4.0) + std::sqrt(2.0 * std::log(10.0));
  const double expected_s = 4.0 * chi_s * chi_s / (2.0 * 16.0 * 0.04);
  CHECK(symplectic_shot_bound(SymplecticVariant::symmetric, 2, 2.0, 4.0, 0.2, 0.1) ==
        Catch::Approx(expected_s).epsilon(1e-13));
  CHECK(static_cast<std::uint64_t>(std::ceil(expected_s)) == 119u);

  // The regularized variant is the raw formula at the shrunken target.
  CHECK(regularized_shot_bound(SymplecticVariant::vacuum_shared, 2, 2.0, 4.0, 0.3, 0.1) ==
        Catch::Approx(symplectic_shot_bound(SymplecticVariant::vacuum_shared, 2, 2.0, 4.0,
                                            0.3 / 36.0, 0.1))
            .epsilon(1e-13));
  // ... and matches the direct closed form 324 m z^6 chi^2 / (eta^2 tau^2).
  CHECK(regularized_shot_bound(SymplecticVariant::vacuum_shared, 2, 2.0, 4.0, 0.3, 0.1) ==
        Catch::Approx(324.0 * 2.0 * 64.0 * chi_v * chi_v / (16.0 * 0.09)).epsilon(1e-13));

  // Displacement formulas.
  const double chi_t = std::sqrt(4.0) + std::sqrt(2.0 * std::log(10.0));
  const double nd = 3.0 * 0.05;
  CHECK(displacement_shot_bound_tmsv(2, 3.0, 0.05, 0.1, 0.1) ==
        Catch::Approx((1.0 + nd + 1.5 * nd * nd) * chi_t * chi_t / (3.0 * 0.01))
            .epsilon(1e-13));

  const double chi_1 = std::sqrt(4.0) + std::sqrt(2.0 * std::log(20.0));
  CHECK(displacement_shot_bound_single_mode(2, 50.0, 0.01, 0.1, 0.1) ==
        Catch::Approx(2.0 * chi_1 * chi_1 * (1.01 * 1.01 / 50.0 + 50.0 * 1e-4) / 0.01)
            .epsilon(1e-13));

  CHECK_THROWS_AS(symplectic_shot_bound(SymplecticVariant::vacuum_shared, 2, 2.0, 0.0, 0.2, 0.1),
                  InvalidArgument);
}

TEST_CASE("query planner: derived parameters and assembly") {
  const QueryPlan plan = plan_queries(2, 2.0, 1.0, 1e6, 0.5, 0.1);
  CHECK(plan.eta == Catch::Approx(1000.0));
  CHECK(plan.nu == Catch::Approx(std::pow(1e6, 0.25) + 1.0));
  CHECK(plan.eta <= std::sqrt(plan.n_bar_in) * (1.0 + 1e-12));
  CHECK(plan.nu <= 1.0 + plan.n_bar_in / 4.0);
  CHECK(plan.eps_S <= 0.25 / (2592.0 * 2.0 * 2.0 * 2.0));
  CHECK(plan.eps_S ==
        Catch::Approx(0.25 / (2592.0 * 2.0 * 2.0 * 2.0 * std::pow(1e6 + 1.0, 0.25))));
  CHECK(plan.eps_r == Catch::Approx(0.5 / (2.0 * std::sqrt(2.0) * std::sqrt(5.0))));
  CHECK(plan.N_S == static_cast<std::uint64_t>(std::ceil(regularized_shot_bound(
                        SymplecticVariant::vacuum_shared, 2, 2.0, plan.eta, plan.eps_S, 0.1))));
  CHECK(plan.N_tot == 5u * plan.N_S + plan.N_r);

  // All four variant combinations assemble N_tot from their own counters.
  for (auto sv : {SymplecticVariant::vacuum_shared, SymplecticVariant::symmetric})
    for (auto dv : {DisplacementVariant::tmsv, DisplacementVariant::single_mode}) {
      const QueryPlan p = plan_queries(2, 2.0, 1.0, 1e6, 0.5, 0.1, sv, dv);
      const std::uint64_t probes = (sv == SymplecticVariant::vacuum_shared) ? 5u : 8u;
      const std::uint64_t passes = (dv == DisplacementVariant::tmsv) ? 1u : 2u;
      CHECK(p.N_tot == probes * p.N_S + passes * p.N_r);
      CHECK(p.N_S >= 1u);
      CHECK(p.N_r >= 1u);
    }
}

TEST_CASE("query planner: scaling and monotonicity") {
  const QueryPlan fine = plan_queries(2, 2.0, 1.0, 1e6, 0.1, 0.1);
  const QueryPlan coarse = plan_queries(2, 2.0, 1.0, 1e6, 0.2, 0.1);
  const double ratio = static_cast<double>(fine.N_S) / static_cast<double>(coarse.N_S);
  CHECK(ratio >= 15.9);
  CHECK(ratio <= 16.1);

  const QueryPlan strict_delta = plan_queries(2, 2.0, 1.0, 1e6, 0.5, 0.01);
  const QueryPlan loose_delta = plan_queries(2, 2.0, 1.0, 1e6, 0.5, 0.1);
  CHECK(strict_delta.N_S >= loose_delta.N_S);
  CHECK(strict_delta.N_r >= loose_delta.N_r);

  // More input photons per probe, fewer shots.
  const QueryPlan rich = plan_queries(2, 2.0, 1.0, 1e12, 0.5, 0.1);
  CHECK(rich.N_S < loose_delta.N_S);
  CHECK(rich.N_r <= loose_delta.N_r);
}

TEST_CASE("query planner: feasibility gates") {
  // (2m)^{4/3} = 6.35 at m = 2: a budget of 6 photons is infeasible.
  CHECK_THROWS_AS(plan_queries(2, 2.0, 1.0, 6.0, 0.5, 0.1), PlanningError);
  CHECK_THROWS_AS(plan_queries(2, 2.0, 1.0, 1e6, 1.5, 0.1), InvalidArgument);
  CHECK_THROWS_AS(plan_queries(0, 2.0, 1.0, 1e6, 0.5, 0.1), InvalidArgument);
  // Accuracy so tight the counter would overflow.
  CHECK_THROWS_AS(plan_queries(2, 2.0, 1.0, 1e6, 1e-4, 0.1), PlanningError);
}

TEST_CASE("query planner: single-mode squeezing recipe") {
  const QueryPlan p = plan_queries(2, 2.0, 1.0, 1e6, 0.5, 0.1,
                                   SymplecticVariant::vacuum_shared,
                                   DisplacementVariant::single_mode);
  CHECK(p.z_in == Catch::Approx(1000.0)); // sqrt budget, cap not binding
  CHECK(2.0 * (p.z_in + 1.0 / p.z_in - 2.0) / 4.0 <= 1e6);

  // Tight budget with many modes: the cap binds and the probe stays legal.
  const QueryPlan tight = plan_queries(8, 1.0, 1.0, 45.0, 0.9, 0.1,
                                       SymplecticVariant::vacuum_shared,
                                       DisplacementVariant::single_mode);
  CHECK(tight.z_in == Catch::Approx(std::min(std::sqrt(45.0), 1.0 + 4.0 * 45.0 / 8.0)));
  CHECK(8.0 * (tight.z_in + 1.0 / tight.z_in - 2.0) / 4.0 <= 45.0);
}

} // namespace
