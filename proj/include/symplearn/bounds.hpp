//! @file bounds.hpp
//! @brief Accuracy-to-channel-distance bounds, shot-count formulas, and the
//! query planner.
//!
//! Everything here is a closed-form, deterministic evaluator.  The distance
//! bounds control the energy-constrained diamond distance between two
//! Gaussian unitary channels in terms of the parameter errors (operator-norm
//! error on the symplectic part, Euclidean error on the displacement).  The
//! shot-count formulas convert accuracy/confidence targets into the number
//! of measurement repetitions each learner needs, and plan_queries assembles
//! a full experiment plan from the problem parameters.

#ifndef SYMPLEARN_BOUNDS_HPP
#define SYMPLEARN_BOUNDS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "symplearn/errors.hpp"
#include "symplearn/symplectic.hpp"

namespace symplearn {

//! g(x) = sqrt(pi/(x+1)) + sqrt(2x); increasing for x >= 1/pi (in particular
//! on [1, inf), where it is used), with g(2) <= 4.
inline double diamond_g(double x) {
  if (x < 0.0) throw InvalidArgument("diamond_g: argument must be nonnegative");
  return std::sqrt(std::numbers::pi / (x + 1.0)) + std::sqrt(2.0 * x);
}

//! Upper bound on half the energy-constrained diamond distance between two
//! displacement channels: sin(min((sqrt(n)+sqrt(n+1))/sqrt(2) * ||r1-r2||, pi/2)).
inline double displacement_diamond_bound(const RealVector& r1, const RealVector& r2,
                                         double n_bar) {
  if (r1.size() != r2.size())
    throw InvalidArgument("displacement_diamond_bound: vector lengths differ");
  if (n_bar < 0.0)
    throw InvalidArgument("displacement_diamond_bound: n_bar must be nonnegative");
  const double dist = (r1 - r2).norm();
  const double arg = (std::sqrt(n_bar) + std::sqrt(n_bar + 1.0)) / std::sqrt(2.0) * dist;
  return std::sin(std::min(arg, std::numbers::pi / 2.0));
}

//! Upper bound on half the energy-constrained diamond distance between two
//! symplectic Gaussian unitaries:
//!   sqrt((sqrt6 + sqrt10 + 5 sqrt(2m))(n_bar+1)) * g(||S2^-1 S1||) * sqrt(||S2^-1 S1 - 1||_F).
inline double symplectic_diamond_bound(const SymplecticMatrix& s1, const SymplecticMatrix& s2,
                                       double n_bar) {
  if (s1.modes() != s2.modes())
    throw InvalidArgument("symplectic_diamond_bound: mode counts differ");
  if (n_bar < 0.0)
    throw InvalidArgument("symplectic_diamond_bound: n_bar must be nonnegative");
  const int m = s1.modes();
  // Coinciding arguments name the same channel; short-circuit so roundoff in
  // S2^-1 S1 cannot surface (sqrt turns 1e-15 residuals into 1e-7 outputs).
  if ((s1.matrix() - s2.matrix()).cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const RealMatrix rel = s2.inverse() * s1.matrix();
  const RealMatrix dev = rel - RealMatrix::Identity(2 * m, 2 * m);
  const double dim_factor =
      std::sqrt(6.0) + std::sqrt(10.0) + 5.0 * std::sqrt(2.0 * m);
  return std::sqrt(dim_factor * (n_bar + 1.0)) * diamond_g(operator_norm(rel)) *
         std::sqrt(dev.norm());
}

//! Multiplicative mismatch from an additive symplectic error: if S, S_tilde
//! are symplectic with ||S|| <= z and ||S_tilde - S|| <= eps_S < 1/(2z),
//! then ||S_tilde^-1 S - 1|| <= 2 z eps_S.
inline double additive_to_multiplicative(double eps_S, double z) {
  if (eps_S < 0.0 || z < 1.0)
    throw InvalidArgument("additive_to_multiplicative: need eps_S >= 0 and z >= 1");
  if (!(z * eps_S < 0.5))
    throw InvalidArgument(
        "additive_to_multiplicative: z*eps_S must be below 1/2 for the bound to hold");
  return 2.0 * z * eps_S;
}

//! Upper bound on half the energy-constrained diamond distance between the
//! estimated channel (r_tilde, S_tilde) and the truth (r, S), given only the
//! parameter errors eps_S = ||S_tilde - S||, eps_r = ||r_tilde - r||_2 and
//! the norm bound ||S|| <= z:
//!
//!   6 sqrt(9 sqrt(2m)(n_bar+1)) sqrt(z sqrt(2m) eps_S)
//!     + sqrt(2) sqrt(z^2 n_bar + 1) eps_r.
//!
//! Both terms bound *half* the full diamond norm, hence the symplectic
//! coefficient 6 (the full-norm statement carries 12); under this halved
//! form the error budgets eps_S <= eps^2/(2592 m z (n_bar+1)) and
//! eps_r <= eps/(2 sqrt2 sqrt(z^2 n_bar + 1)) sum to a bound of exactly eps.
inline double combined_diamond_bound(double eps_S, double eps_r, int m, double z,
                                     double n_bar) {
  if (m < 1) throw InvalidArgument("combined_diamond_bound: m must be positive");
  if (eps_S < 0.0 || eps_r < 0.0 || z < 1.0 || n_bar < 0.0)
    throw InvalidArgument("combined_diamond_bound: invalid parameters");
  if (!(z * eps_S < 0.5))
    throw InvalidArgument(
        "combined_diamond_bound: z*eps_S must be below 1/2 for the bound to hold");
  const double two_m = 2.0 * m;
  const double sym = 6.0 * std::sqrt(9.0 * std::sqrt(two_m) * (n_bar + 1.0)) *
                     std::sqrt(z * std::sqrt(two_m) * eps_S);
  const double disp = std::sqrt(2.0) * std::sqrt(z * z * n_bar + 1.0) * eps_r;
  return sym + disp;
}

//! Presentation helper: diamond-distance bounds above 1 are trivially true,
//! so reports clamp them to 1.  The evaluators themselves never clamp.
inline double clamp_diamond_bound(double bound) { return std::min(bound, 1.0); }

// ---------------------------------------------------------------------------
// Shot-count formulas
// ---------------------------------------------------------------------------

//! Which probe design estimates the symplectic part.
enum class SymplecticVariant { vacuum_shared, symmetric };

//! Which probe family estimates the displacement.
enum class DisplacementVariant { tmsv, single_mode };

//! Heterodyne shots per probe setting so the raw (pre-regularization)
//! estimate satisfies ||S_hat - S|| <= eps with probability >= 1 - delta,
//! for ||S|| <= z and probe amplitude eta:
//!   vacuum_shared: 4 m z^2 (sqrt(2m) + sqrt(2 log(2m/delta)))^2 / (eta^2 eps^2)
//!   symmetric:       z^2 (2 sqrt(2m) + sqrt(2 log(1/delta)))^2 / (2 eta^2 eps^2)
inline double symplectic_shot_bound(SymplecticVariant variant, int m, double z, double eta,
                                    double eps, double delta) {
  if (m < 1 || z < 1.0 || eta <= 0.0 || eps <= 0.0 || delta <= 0.0 || delta >= 1.0)
    throw InvalidArgument("symplectic_shot_bound: invalid parameters");
  const double two_m = 2.0 * m;
  if (variant == SymplecticVariant::vacuum_shared) {
    const double chi = std::sqrt(two_m) + std::sqrt(2.0 * std::log(two_m / delta));
    return 4.0 * m * z * z * chi * chi / (eta * eta * eps * eps);
  }
  const double chi = 2.0 * std::sqrt(two_m) + std::sqrt(2.0 * std::log(1.0 / delta));
  return z * z * chi * chi / (2.0 * eta * eta * eps * eps);
}

//! Shots per probe setting so the regularized output satisfies
//! ||S_tilde - S|| <= tau with probability >= 1 - delta: the raw target is
//! eps = tau / (9 z^2), giving 324 m z^6 (...)^2/(eta^2 tau^2) for the
//! vacuum-shared design and 81 z^6 (...)^2/(2 eta^2 tau^2) for the symmetric.
inline double regularized_shot_bound(SymplecticVariant variant, int m, double z, double eta,
                                     double tau, double delta) {
  return symplectic_shot_bound(variant, m, z, eta, tau / (9.0 * z * z), delta);
}

//! Repetitions of the entangled displacement protocol so that
//! ||r_tilde - r||_2 <= eps_r with probability >= 1 - delta, given the
//! multiplicative symplectic mismatch norm ||Delta||:
//!   (1 + nu ||Delta|| + (3/2)(nu ||Delta||)^2)(sqrt(2m) + sqrt(2 log(1/delta)))^2
//!      / (nu eps_r^2).
inline double displacement_shot_bound_tmsv(int m, double nu, double delta_norm, double eps_r,
                                           double delta) {
  if (m < 1 || nu < 1.0 || delta_norm < 0.0 || eps_r <= 0.0 || delta <= 0.0 || delta >= 1.0)
    throw InvalidArgument("displacement_shot_bound_tmsv: invalid parameters");
  const double nd = nu * delta_norm;
  const double chi = std::sqrt(2.0 * m) + std::sqrt(2.0 * std::log(1.0 / delta));
  return (1.0 + nd + 1.5 * nd * nd) * chi * chi / (nu * eps_r * eps_r);
}

//! Repetitions per pass of the single-mode-squeezed displacement protocol
//! (the protocol uses two passes, so 2 N_r queries):
//!   2 (sqrt(2m) + sqrt(2 log(2/delta)))^2 / eps_r^2
//!      * ((1 + ||Delta||)^2 / z_in + z_in ||Delta||^2).
inline double displacement_shot_bound_single_mode(int m, double z_in, double delta_norm,
                                                  double eps_r, double delta) {
  if (m < 1 || z_in < 1.0 || delta_norm < 0.0 || eps_r <= 0.0 || delta <= 0.0 ||
      delta >= 1.0)
    throw InvalidArgument("displacement_shot_bound_single_mode: invalid parameters");
  const double chi = std::sqrt(2.0 * m) + std::sqrt(2.0 * std::log(2.0 / delta));
  const double noise =
      (1.0 + delta_norm) * (1.0 + delta_norm) / z_in + z_in * delta_norm * delta_norm;
  return 2.0 * chi * chi * noise / (eps_r * eps_r);
}

// ---------------------------------------------------------------------------
// Query planner
// ---------------------------------------------------------------------------

//! A complete experiment plan: problem parameters, the derived protocol
//! parameters, and integer shot counts.
struct QueryPlan {
  // Problem parameters.
  int m = 1;
  double z = 1.0;
  double n_bar = 1.0;
  double n_bar_in = 1.0;
  double epsilon = 0.1;
  double delta = 0.1;
  // Derived protocol parameters.
  double eta = 0.0;   //!< coherent probe amplitude for the symplectic stage
  double nu = 1.0;    //!< two-mode squeezing strength (entangled variant)
  double z_in = 1.0;  //!< single-mode squeezing strength (single-mode variant)
  double eps_S = 0.0; //!< symplectic accuracy budget
  double eps_r = 0.0; //!< displacement accuracy budget
  // Shot counts.
  std::uint64_t N_S = 1;   //!< heterodyne shots per symplectic probe setting
  std::uint64_t N_r = 1;   //!< displacement repetitions (per pass)
  std::uint64_t N_tot = 0; //!< total oracle queries
  // Protocol selectors.
  SymplecticVariant sym_variant = SymplecticVariant::vacuum_shared;
  DisplacementVariant disp_variant = DisplacementVariant::tmsv;

  //! Queries consumed by the symplectic stage.
  std::uint64_t symplectic_queries() const {
    const std::uint64_t probes =
        (sym_variant == SymplecticVariant::vacuum_shared)
            ? static_cast<std::uint64_t>(2 * m + 1)
            : static_cast<std::uint64_t>(4 * m);
    return probes * N_S;
  }

  //! Queries consumed by the displacement stage.
  std::uint64_t displacement_queries() const {
    return (disp_variant == DisplacementVariant::tmsv) ? N_r : 2 * N_r;
  }
};

namespace detail {

//! Smallest integer shot count meeting a real-valued lower bound (>= 1).
inline std::uint64_t ceil_shots(double bound, const char* who) {
  if (!std::isfinite(bound)) {
    std::ostringstream msg;
    msg << who << ": shot-count formula produced a non-finite value";
    throw PlanningError(msg.str());
  }
  if (bound <= 1.0) return 1;
  if (bound > 9.0e18) {
    std::ostringstream msg;
    msg << who << ": required shots (" << bound << ") exceed the 64-bit counter range";
    throw PlanningError(msg.str());
  }
  return static_cast<std::uint64_t>(std::ceil(bound));
}

} // namespace detail

//! Assemble the full query plan for the end-to-end learner from the problem
//! parameters, using the closed-form recipe
//!   eta = sqrt(n_bar_in),          nu = n_bar_in^{1/4} + 1,
//!   eps_S = eps^2 / (2592 m z (n_bar+1) (n_bar_in+1)^{1/4}),
//!   eps_r = eps / (2 sqrt2 sqrt(z^2 n_bar + 1)),
//! which needs n_bar_in >= (2m)^{4/3} so that the squeezed probes respect
//! the input photon budget.  The single-mode variant chooses
//! z_in = min(sqrt(n_bar_in), 1 + 4 n_bar_in / m) so the probe's photon
//! number m(z_in + 1/z_in - 2)/4 stays within the budget.
inline QueryPlan plan_queries(int m, double z, double n_bar, double n_bar_in, double epsilon,
                              double delta,
                              SymplecticVariant sym_variant = SymplecticVariant::vacuum_shared,
                              DisplacementVariant disp_variant = DisplacementVariant::tmsv) {
  if (m < 1) throw InvalidArgument("plan_queries: m must be positive");
  if (z < 1.0) throw InvalidArgument("plan_queries: z must be >= 1");
  if (n_bar <= 0.0 || n_bar_in <= 0.0)
    throw InvalidArgument("plan_queries: photon parameters must be positive");
  if (epsilon <= 0.0 || epsilon >= 1.0 || delta <= 0.0 || delta >= 1.0)
    throw InvalidArgument("plan_queries: epsilon and delta must lie in (0,1)");

  QueryPlan plan;
  plan.m = m;
  plan.z = z;
  plan.n_bar = n_bar;
  plan.n_bar_in = n_bar_in;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.sym_variant = sym_variant;
  plan.disp_variant = disp_variant;

  const double two_m = 2.0 * m;
  if (n_bar_in < std::pow(two_m, 4.0 / 3.0)) {
    std::ostringstream msg;
    msg << "plan_queries: recipe needs n_bar_in >= (2m)^{4/3} = "
        << std::pow(two_m, 4.0 / 3.0) << ", got " << n_bar_in;
    throw PlanningError(msg.str());
  }

  plan.eta = std::sqrt(n_bar_in);
  plan.nu = std::pow(n_bar_in, 0.25) + 1.0;
  // The budget nu <= 1 + n_bar_in/(2m) is equivalent to the precondition
  // above; check it explicitly so a violation cannot slip through.
  if (plan.nu > 1.0 + n_bar_in / two_m + 1e-9)
    throw PlanningError("plan_queries: squeezing strength exceeds the photon budget");

  plan.eps_S = epsilon * epsilon /
               (2592.0 * m * z * (n_bar + 1.0) * std::pow(n_bar_in + 1.0, 0.25));
  plan.eps_r = epsilon / (2.0 * std::sqrt(2.0) * std::sqrt(z * z * n_bar + 1.0));

  plan.N_S = detail::ceil_shots(
      regularized_shot_bound(sym_variant, m, z, plan.eta, plan.eps_S, delta),
      "plan_queries");

  if (disp_variant == DisplacementVariant::tmsv) {
    // Final-form repetition count with the mismatch bound 2 z eps_S
    // substituted for ||Delta||.
    const double nd = plan.nu * z * plan.eps_S;
    const double chi = std::sqrt(two_m) + std::sqrt(std::log(2.0 / delta));
    plan.N_r = detail::ceil_shots(
        (1.0 + 2.0 * nd + 6.0 * nd * nd) * chi * chi / (plan.nu * plan.eps_r * plan.eps_r),
        "plan_queries");
  } else {
    plan.z_in = std::max(1.0, std::min(std::sqrt(n_bar_in), 1.0 + 4.0 * n_bar_in / m));
    plan.N_r = detail::ceil_shots(
        displacement_shot_bound_single_mode(
            m, plan.z_in, additive_to_multiplicative(plan.eps_S, z), plan.eps_r, delta),
        "plan_queries");
  }

  const double probes = (sym_variant == SymplecticVariant::vacuum_shared) ? 2.0 * m + 1.0
                                                                          : 4.0 * m;
  const double passes = (disp_variant == DisplacementVariant::tmsv) ? 1.0 : 2.0;
  const double total = probes * static_cast<double>(plan.N_S) +
                       passes * static_cast<double>(plan.N_r);
  if (total > 9.0e18)
    throw PlanningError("plan_queries: total query count exceeds the 64-bit counter range");
  plan.N_tot = plan.symplectic_queries() + plan.displacement_queries();
  return plan;
}

} // namespace symplearn

#endif // SYMPLEARN_BOUNDS_HPP
