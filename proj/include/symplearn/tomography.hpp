//! @file tomography.hpp
//! @brief Query-counted oracle access and the learning routines.
//!
//! The black box hides a Gaussian unitary (r*, S*).  A learner may only
//! submit Gaussian input states whose photon number respects the input
//! budget; every accepted submission increments the query counter by one.
//! The symplectic part is estimated from heterodyne statistics of coherent
//! probes, rounded back onto the symplectic group; the displacement is then
//! estimated with the inverse estimate pre-applied, either through
//! two-mode-squeezed probe pairs or through single-mode squeezed probes with
//! homodyne readout.  learn_unitary composes the stages according to a
//! QueryPlan and scores the run against the plan's accuracy budgets.

#ifndef SYMPLEARN_TOMOGRAPHY_HPP
#define SYMPLEARN_TOMOGRAPHY_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "symplearn/bounds.hpp"
#include "symplearn/errors.hpp"
#include "symplearn/measurement.hpp"
#include "symplearn/phase_space.hpp"
#include "symplearn/rng.hpp"
#include "symplearn/symplectic.hpp"

namespace symplearn {

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

//! How oracle inputs are charged against the photon budget.
//!
//! `paper` charges the canonical probe as the protocol describes it — a
//! coherent probe of amplitude eta costs eta^2, an entangled probe pair
//! costs 2m(nu-1) — *before* any inverse-estimate pre-rotation is applied.
//! For inputs without a declared canonical charge it falls back to
//! Tr[V-1]/4 + ||mean||^2 (note the undoubled mean term, matching the
//! coherent-probe convention).  `strict` charges the physical mean photon
//! number Tr[V-1]/4 + ||mean||^2/2 of the state actually submitted, after
//! any pre-rotation.  The two modes bracket the ambiguity of budgeting a
//! probe whose energy the pre-rotation changes.
enum class Accounting { paper, strict };

//! Black-box access to a hidden Gaussian unitary with a photon budget on
//! inputs and an exact query counter.  The hidden parameters stay readable
//! so validation code can score estimates against ground truth.
class UnitaryOracle {
public:
  UnitaryOracle(GaussianUnitary hidden, double n_bar_in,
                Accounting accounting = Accounting::paper)
      : hidden_(std::move(hidden)), n_bar_in_(n_bar_in), accounting_(accounting) {
    if (!(n_bar_in > 0.0))
      throw InvalidArgument("UnitaryOracle: photon budget must be positive");
  }

  const GaussianUnitary& hidden() const { return hidden_; }
  int modes() const { return hidden_.modes(); }
  double photon_budget() const { return n_bar_in_; }
  Accounting accounting() const { return accounting_; }
  std::uint64_t query_count() const { return query_count_; }

  //! Submit one input state; returns the output state's moments.  The input
  //! may carry extra modes beyond the hidden unitary's register, on which
  //! the box acts as the identity.  `canonical_charge`, when nonnegative,
  //! is the declared photon cost of the probe under `paper` accounting
  //! (ignored under `strict`).  A rejected input does not count as a query.
  GaussianState query(const GaussianState& input, double canonical_charge = -1.0) {
    return query_repeated(input, 1, canonical_charge);
  }

  //! Submit the same input `repetitions` times; the output law is identical
  //! each time, so the moments are returned once and the counter advances
  //! by the full repetition count.
  GaussianState query_repeated(const GaussianState& input, std::uint64_t repetitions,
                               double canonical_charge = -1.0) {
    if (repetitions < 1)
      throw InvalidArgument("UnitaryOracle: repetitions must be >= 1");
    if (input.modes() < modes())
      throw InvalidArgument("UnitaryOracle: input has fewer modes than the hidden unitary");
    check_budget(input, canonical_charge);
    const GaussianState out =
        apply_unitary(embed_on_first_modes(hidden_, input.modes()), input);
    query_count_ += repetitions;
    return out;
  }

private:
  void check_budget(const GaussianState& input, double canonical_charge) const {
    double charge = 0.0;
    if (accounting_ == Accounting::strict) {
      charge = mean_photon_number(input);
    } else if (canonical_charge >= 0.0) {
      charge = canonical_charge;
    } else {
      const double tr = input.cov().trace() - static_cast<double>(input.dim());
      charge = tr / 4.0 + input.mean().squaredNorm();
    }
    // Relative slack so a probe that saturates the budget exactly (eta =
    // sqrt(n_bar_in)) is not rejected for floating-point reasons.
    if (charge > n_bar_in_ * (1.0 + 1e-12) + 1e-12) {
      std::ostringstream msg;
      msg << "UnitaryOracle: input photon number " << charge
          << " exceeds the budget " << n_bar_in_;
      throw EnergyConstraintError(msg.str());
    }
  }

  GaussianUnitary hidden_;
  double n_bar_in_ = 0.0;
  Accounting accounting_ = Accounting::paper;
  std::uint64_t query_count_ = 0;
};

//! Query with an explicit register size: the input must occupy exactly
//! `extended_modes` modes, of which the hidden unitary acts on the first
//! block.  Counts as one query.
inline GaussianState oracle_query(UnitaryOracle& oracle, const GaussianState& input,
                                  int extended_modes) {
  if (extended_modes < oracle.modes())
    throw InvalidArgument("oracle_query: extended register smaller than the hidden unitary");
  if (input.modes() != extended_modes)
    throw InvalidArgument("oracle_query: input does not match the extended register");
  return oracle.query(input);
}

// ---------------------------------------------------------------------------
// Estimate containers
// ---------------------------------------------------------------------------

//! Output of the symplectic stage: the raw column estimate and its rounding
//! onto the symplectic group, with the accuracy budget it was run for.
struct SymplecticEstimate {
  RealMatrix s_hat;                                       //!< raw estimate
  SymplecticMatrix s_tilde{RealMatrix::Identity(2, 2)};   //!< rounded estimate
  double eps_S_budget = 0.0;                              //!< target sup-norm error
  std::uint64_t queries_used = 0;
};

//! Output of the displacement stage.
struct DisplacementEstimate {
  RealVector r_tilde;            //!< estimated displacement
  double eps_r_budget = 0.0;     //!< target Euclidean error
  std::uint64_t queries_used = 0;
};

//! Everything a single end-to-end run reports: true errors (ground truth is
//! available in simulation), the certified channel-distance bound, success
//! flags against the plan's budgets, and exact query accounting.
struct TrialReport {
  int trial_index = 0;
  std::uint64_t seed = 0;
  double eps_S_true = std::numeric_limits<double>::infinity();
  double eps_r_true = std::numeric_limits<double>::infinity();
  double combined_bound = std::numeric_limits<double>::infinity();
  bool symplectic_ok = false;   //!< eps_S_true <= plan budget
  bool displacement_ok = false; //!< eps_r_true <= plan budget
  bool bound_ok = false;        //!< combined_bound <= plan epsilon
  bool failed = false;          //!< a stage threw; see failure_reason
  std::string failure_reason;
  std::string failure_code;     //!< taxonomy tag, empty when nothing went wrong
  std::uint64_t queries_symplectic = 0;
  std::uint64_t queries_displacement = 0;
  std::uint64_t queries_total = 0;
  double wall_time_seconds = 0.0;
};

//! Bundle returned by learn_unitary.
struct LearnResult {
  SymplecticEstimate symplectic;
  DisplacementEstimate displacement;
  TrialReport report;
};

// ---------------------------------------------------------------------------
// Symplectic stage
// ---------------------------------------------------------------------------

namespace detail {

//! Sample mean of `shots` heterodyne outcomes on the oracle's output for a
//! given probe, under the sampling policy.  Consumes exactly `shots` queries.
inline RealVector probe_mean(UnitaryOracle& oracle, const GaussianState& probe,
                             double canonical_charge, std::uint64_t shots,
                             std::uint64_t rng_seed, std::uint64_t stream_index,
                             SamplerMode sampler) {
  const GaussianState out = oracle.query_repeated(probe, shots, canonical_charge);
  Xoshiro256pp rng = Xoshiro256pp::derive(rng_seed, Stream::probe, stream_index);
  const RealMatrix het_cov =
      0.5 * (out.cov() + RealMatrix::Identity(out.dim(), out.dim()));
  return gaussian_mean_estimate(out.mean(), het_cov, static_cast<std::int64_t>(shots),
                                rng, sampler);
}

} // namespace detail

//! Estimate S* column by column from heterodyne means, sharing one vacuum
//! baseline: column i is (Ybar_i - Ybar_0)/eta, where Ybar_0 averages the
//! vacuum response and Ybar_i the response to the coherent probe eta e_i.
//! Consumes exactly (2m+1) * shots queries.
inline RealMatrix learn_symplectic_vacuum_shared(UnitaryOracle& oracle, double eta,
                                                 std::uint64_t shots, std::uint64_t rng_seed,
                                                 SamplerMode sampler = SamplerMode::per_shot) {
  if (!(eta > 0.0))
    throw InvalidArgument("learn_symplectic_vacuum_shared: eta must be positive");
  if (shots < 1)
    throw InvalidArgument("learn_symplectic_vacuum_shared: shots must be >= 1");
  const int m = oracle.modes();
  const int dim = 2 * m;
  const RealVector y0 =
      detail::probe_mean(oracle, vacuum(m), 0.0, shots, rng_seed, 0, sampler);
  RealMatrix s_hat(dim, dim);
  for (int i = 0; i < dim; ++i) {
    RealVector amp = RealVector::Zero(dim);
    amp(i) = eta;
    const RealVector yi = detail::probe_mean(oracle, coherent(amp), eta * eta, shots,
                                             rng_seed, static_cast<std::uint64_t>(i) + 1,
                                             sampler);
    s_hat.col(i) = (yi - y0) / eta;
  }
  return s_hat;
}

//! Estimate S* from symmetric coherent probes: column i is
//! (Ybar_i^+ - Ybar_i^-)/(2 eta) with probes +-eta e_i.  The hidden
//! displacement cancels exactly and the column estimators are mutually
//! independent.  Consumes exactly 4m * shots queries.
inline RealMatrix learn_symplectic_symmetric(UnitaryOracle& oracle, double eta,
                                             std::uint64_t shots, std::uint64_t rng_seed,
                                             SamplerMode sampler = SamplerMode::per_shot) {
  if (!(eta > 0.0))
    throw InvalidArgument("learn_symplectic_symmetric: eta must be positive");
  if (shots < 1)
    throw InvalidArgument("learn_symplectic_symmetric: shots must be >= 1");
  const int m = oracle.modes();
  const int dim = 2 * m;
  RealMatrix s_hat(dim, dim);
  for (int i = 0; i < dim; ++i) {
    RealVector amp = RealVector::Zero(dim);
    amp(i) = eta;
    const std::uint64_t base = 2 * static_cast<std::uint64_t>(i);
    const RealVector y_plus = detail::probe_mean(oracle, coherent(amp), eta * eta, shots,
                                                 rng_seed, base, sampler);
    const RealVector y_minus = detail::probe_mean(oracle, coherent(-amp), eta * eta, shots,
                                                  rng_seed, base + 1, sampler);
    s_hat.col(i) = (y_plus - y_minus) / (2.0 * eta);
  }
  return s_hat;
}

//! Run a raw symplectic estimator at the shot count its concentration bound
//! prescribes for sup-norm accuracy tau/(9 z^2), then round the estimate
//! onto the symplectic group; the rounding guarantee turns that into
//! ||S_tilde - S*||_inf <= tau with probability >= 1 - delta.  `z` is the
//! known a-priori bound on ||S*||_inf the shot formula needs.  A rounding
//! domain failure propagates to the caller, which records it as a trial
//! failure.
inline SymplecticEstimate learn_symplectic_regularized(
    UnitaryOracle& oracle, SymplecticVariant variant, double eta, double tau, double delta,
    double z, std::uint64_t rng_seed, SamplerMode sampler = SamplerMode::per_shot) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidArgument("learn_symplectic_regularized: tau must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgument("learn_symplectic_regularized: delta must lie in (0,1)");
  if (!(z >= 1.0))
    throw InvalidArgument("learn_symplectic_regularized: z must be >= 1");
  const int m = oracle.modes();
  const std::uint64_t shots = detail::ceil_shots(
      regularized_shot_bound(variant, m, z, eta, tau, delta), "learn_symplectic_regularized");
  const std::uint64_t before = oracle.query_count();
  SymplecticEstimate est;
  est.s_hat = (variant == SymplecticVariant::vacuum_shared)
                  ? learn_symplectic_vacuum_shared(oracle, eta, shots, rng_seed, sampler)
                  : learn_symplectic_symmetric(oracle, eta, shots, rng_seed, sampler);
  est.s_tilde = regularize(est.s_hat);
  est.eps_S_budget = tau;
  est.queries_used = oracle.query_count() - before;
  return est;
}

// ---------------------------------------------------------------------------
// Displacement stage
// ---------------------------------------------------------------------------

//! Estimate r* through m two-mode-squeezed probe pairs: pre-rotate the
//! signal block by the inverse symplectic estimate, query, undo the
//! two-mode squeezing, heterodyne the signal block, and rescale the outcome
//! mean by 1/sqrt(nu).  The outcome law is N(sqrt(nu) r*, (A+1)/2), so the
//! estimator is exactly unbiased whatever the mismatch between S_tilde and
//! S*.  Consumes exactly `repetitions` queries.
inline DisplacementEstimate learn_displacement_tmsv(UnitaryOracle& oracle,
                                                    const SymplecticMatrix& s_tilde, double nu,
                                                    std::uint64_t repetitions,
                                                    std::uint64_t rng_seed,
                                                    SamplerMode sampler = SamplerMode::per_shot) {
  if (!(nu >= 1.0))
    throw InvalidArgument("learn_displacement_tmsv: nu must be >= 1");
  if (repetitions < 1)
    throw InvalidArgument("learn_displacement_tmsv: repetitions must be >= 1");
  const int m = oracle.modes();
  if (s_tilde.modes() != m)
    throw InvalidArgument("learn_displacement_tmsv: estimate does not match the oracle");

  const GaussianState pairs = tmsv(nu, m);
  const GaussianUnitary undo = embed_on_first_modes(
      GaussianUnitary::from_symplectic(SymplecticMatrix(s_tilde.inverse())), 2 * m);
  const GaussianState input = apply_unitary(undo, pairs);
  // Canonical probe cost: the photon number of the squeezed pairs before
  // the pre-rotation.
  const double canonical = 2.0 * m * (nu - 1.0);
  const GaussianState out = oracle.query_repeated(input, repetitions, canonical);

  // Undo the two-mode squeezing and heterodyne the signal half.  The outcome
  // law is N(mean_sel, (A + 1) / 2) with A the signal block of the unsqueezed
  // covariance.  Conjugating the covariance by the inverse squeezer directly
  // would push nu^2-scale intermediates through a cancellation down to O(1),
  // costing ~ u nu^2 in absolute error; transforming a factor L (L L^T = cov)
  // takes the same cancellation only linearly, so the law is assembled as
  // F F^T with F = [S_nu^{-1} L, 1] / sqrt(2) restricted to the signal rows.
  const RealMatrix unsqueeze = tmsv_symplectic_inverse(nu, m);
  const RealVector mean_out = unsqueeze * out.mean();
  const RealMatrix noise = unsqueeze * detail::gaussian_factor(out.cov());
  const int dim = out.dim();
  const double root_half = std::sqrt(0.5);
  RealMatrix factor(2 * m, dim + 2 * m);
  factor.leftCols(dim) = root_half * noise.topRows(2 * m);
  factor.rightCols(2 * m) = root_half * RealMatrix::Identity(2 * m, 2 * m);

  Xoshiro256pp rng = Xoshiro256pp::derive(rng_seed, Stream::probe, 0);
  const RealVector mu = gaussian_mean_estimate_from_factor(
      mean_out.head(2 * m), factor, static_cast<std::int64_t>(repetitions), rng, sampler);

  DisplacementEstimate est;
  est.r_tilde = mu / std::sqrt(nu);
  est.queries_used = repetitions;
  return est;
}

//! Estimate r* without entanglement, one quadrature family per pass: squeeze
//! every mode along the quadrature being read out, pre-rotate by the inverse
//! symplectic estimate, query, and homodyne that quadrature family;
//! interleave the two passes into the full vector.  Consumes exactly
//! 2 * `repetitions` queries.
inline DisplacementEstimate learn_displacement_single_mode(
    UnitaryOracle& oracle, const SymplecticMatrix& s_tilde, double z_in,
    std::uint64_t repetitions, std::uint64_t rng_seed,
    SamplerMode sampler = SamplerMode::per_shot) {
  if (!(z_in >= 1.0))
    throw InvalidArgument("learn_displacement_single_mode: z_in must be >= 1");
  if (repetitions < 1)
    throw InvalidArgument("learn_displacement_single_mode: repetitions must be >= 1");
  const int m = oracle.modes();
  if (s_tilde.modes() != m)
    throw InvalidArgument("learn_displacement_single_mode: estimate does not match the oracle");

  const GaussianUnitary undo =
      GaussianUnitary::from_symplectic(SymplecticMatrix(s_tilde.inverse()));
  // Canonical probe cost: photon number of the squeezed product state.
  const double canonical = m * (z_in + 1.0 / z_in - 2.0) / 4.0;

  const auto pass = [&](QuadratureOrientation orientation,
                        std::uint64_t stream_index) -> RealVector {
    const GaussianState probe = single_mode_squeezed(z_in, m, orientation);
    const GaussianState out =
        oracle.query_repeated(apply_unitary(undo, probe), repetitions, canonical);
    // Homodyne the squeezed quadrature family: momentum sits at odd
    // interleaved indices, position at even ones.
    std::vector<int> sel(static_cast<std::size_t>(m));
    const int offset = (orientation == QuadratureOrientation::position) ? 0 : 1;
    for (int k = 0; k < m; ++k) sel[static_cast<std::size_t>(k)] = 2 * k + offset;
    Xoshiro256pp rng = Xoshiro256pp::derive(rng_seed, Stream::probe, stream_index);
    return gaussian_mean_estimate(detail::select(out.mean(), sel),
                                  0.5 * detail::select(out.cov(), sel),
                                  static_cast<std::int64_t>(repetitions), rng, sampler);
  };

  const RealVector p_hat = pass(QuadratureOrientation::momentum, 0);
  const RealVector x_hat = pass(QuadratureOrientation::position, 1);

  DisplacementEstimate est;
  est.r_tilde.resize(2 * m);
  for (int k = 0; k < m; ++k) {
    est.r_tilde(2 * k) = x_hat(k);
    est.r_tilde(2 * k + 1) = p_hat(k);
  }
  est.queries_used = 2 * repetitions;
  return est;
}

// ---------------------------------------------------------------------------
// End-to-end learner
// ---------------------------------------------------------------------------

//! Run the full protocol a QueryPlan prescribes: the regularized symplectic
//! stage, then the selected displacement stage with the inverse estimate
//! pre-applied.  Any stage error (photon budget, rounding domain) is
//! recorded as a failed trial rather than thrown.  The report scores the
//! estimates against ground truth and the plan's budgets and carries exact
//! query counts.
inline LearnResult learn_unitary(UnitaryOracle& oracle, const QueryPlan& plan,
                                 std::uint64_t rng_seed,
                                 SamplerMode sampler = SamplerMode::per_shot) {
  if (oracle.modes() != plan.m)
    throw InvalidArgument("learn_unitary: oracle and plan mode counts do not match");
  const auto t_start = std::chrono::steady_clock::now();
  const std::uint64_t before = oracle.query_count();

  LearnResult result;
  result.report.seed = rng_seed;

  // Independent per-stage seeds derived from the trial seed.
  Xoshiro256pp seeder = Xoshiro256pp::derive(rng_seed, Stream::instance, 0);
  const std::uint64_t seed_symplectic = seeder.next_u64();
  const std::uint64_t seed_displacement = seeder.next_u64();

  try {
    result.symplectic =
        learn_symplectic_regularized(oracle, plan.sym_variant, plan.eta, plan.eps_S,
                                     plan.delta, plan.z, seed_symplectic, sampler);
    result.displacement =
        (plan.disp_variant == DisplacementVariant::tmsv)
            ? learn_displacement_tmsv(oracle, result.symplectic.s_tilde, plan.nu, plan.N_r,
                                      seed_displacement, sampler)
            : learn_displacement_single_mode(oracle, result.symplectic.s_tilde, plan.z_in,
                                             plan.N_r, seed_displacement, sampler);
    result.displacement.eps_r_budget = plan.eps_r;
  } catch (const EnergyConstraintError& e) {
    result.report.failed = true;
    result.report.failure_reason = e.what();
    result.report.failure_code = "energy-constraint";
  } catch (const RegularizationDomainError& e) {
    result.report.failed = true;
    result.report.failure_reason = e.what();
    result.report.failure_code = "regularization-domain";
  } catch (const Error& e) {
    result.report.failed = true;
    result.report.failure_reason = e.what();
    result.report.failure_code = "protocol";
  }

  result.report.queries_symplectic = result.symplectic.queries_used;
  result.report.queries_displacement = result.displacement.queries_used;
  result.report.queries_total = oracle.query_count() - before;

  if (!result.report.failed) {
    const GaussianUnitary& truth = oracle.hidden();
    result.report.eps_S_true =
        operator_norm(result.symplectic.s_tilde.matrix() - truth.s().matrix());
    result.report.eps_r_true = (result.displacement.r_tilde - truth.r()).norm();
    result.report.symplectic_ok = result.report.eps_S_true <= plan.eps_S;
    result.report.displacement_ok = result.report.eps_r_true <= plan.eps_r;
    try {
      result.report.combined_bound = combined_diamond_bound(
          result.report.eps_S_true, result.report.eps_r_true, plan.m, plan.z, plan.n_bar);
      result.report.bound_ok = result.report.combined_bound <= plan.epsilon;
    } catch (const InvalidArgument& e) {
      // The measured symplectic error left the bound's domain; the trial
      // cannot be certified.
      result.report.combined_bound = std::numeric_limits<double>::infinity();
      result.report.bound_ok = false;
      result.report.failure_reason = e.what();
      result.report.failure_code = "bound-precondition";
    }
  }

  result.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

} // namespace symplearn

#endif // SYMPLEARN_TOMOGRAPHY_HPP
