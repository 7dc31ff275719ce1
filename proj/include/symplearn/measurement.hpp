//! @file measurement.hpp
//! @brief Classical sampling models for Gaussian measurements.
//!
//! Heterodyne detection on a Gaussian state (mean, V) produces outcomes
//! distributed as N(mean, (V+1)/2); homodyne detection of a commuting set of
//! quadratures produces N(mean_sel, V_sel/2).  Both are plain multivariate
//! normals, so sampling reduces to a Cholesky factorization, and every
//! operation here is a deterministic function of (inputs, seed).
//!
//! The passive scheme realizes "heterodyne after an active Gaussian unitary"
//! with linear optics only: interfere the input with a fixed squeezed
//! ancilla on a balanced beam splitter, homodyne complementary quadratures
//! on the two output arms, and post-process the rescaled outcome with S.

#ifndef SYMPLEARN_MEASUREMENT_HPP
#define SYMPLEARN_MEASUREMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "symplearn/errors.hpp"
#include "symplearn/phase_space.hpp"
#include "symplearn/rng.hpp"

namespace symplearn {

//! A batch of measurement outcomes, one row per shot.
struct SampleBatch {
  int dim = 0;                 //!< outcome dimension (columns)
  std::int64_t count = 0;      //!< number of shots (rows)
  RealMatrix data;             //!< count x dim outcome matrix
  std::uint64_t seed_trace = 0; //!< seed the batch was drawn from

  //! Column-wise average of the shots.
  RealVector sample_mean() const { return data.colwise().mean().transpose(); }
};

namespace detail {

//! Lower-triangular factor L with L L^T = cov, with a small diagonal jitter
//! retry for near-singular covariances (strong squeezing makes them
//! ill-conditioned).
inline RealMatrix gaussian_factor(const RealMatrix& cov) {
  const RealMatrix sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<RealMatrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double jitter = 1e-12 * std::max(1.0, sym.diagonal().cwiseAbs().maxCoeff());
  const RealMatrix bumped =
      sym + jitter * RealMatrix::Identity(sym.rows(), sym.cols());
  Eigen::LLT<RealMatrix> retry(bumped);
  if (retry.info() != Eigen::Success)
    throw NumericError("gaussian_factor: covariance factorization failed");
  return retry.matrixL();
}

//! Rows of i.i.d. draws from N(mean, cov).
inline RealMatrix gaussian_rows(const RealVector& mean, const RealMatrix& cov,
                                std::int64_t count, Xoshiro256pp& rng) {
  const int dim = static_cast<int>(mean.size());
  const RealMatrix l = gaussian_factor(cov);
  RealMatrix rows(count, dim);
  RealVector z(dim);
  for (std::int64_t i = 0; i < count; ++i) {
    for (int j = 0; j < dim; ++j) z(j) = rng.normal();
    rows.row(i) = (mean + l * z).transpose();
  }
  return rows;
}

inline RealVector select(const RealVector& v, const std::vector<int>& idx) {
  RealVector out(static_cast<int>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<int>(i)) = v(idx[i]);
  return out;
}

inline RealMatrix select(const RealMatrix& m, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  RealMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

} // namespace detail

//! Heterodyne detection: `count` i.i.d. draws from N(mean, (cov+1)/2).
inline SampleBatch heterodyne(const GaussianState& state, std::int64_t count,
                              std::uint64_t rng_seed) {
  if (count < 1) throw InvalidArgument("heterodyne: count must be >= 1");
  const int dim = state.dim();
  const RealMatrix noisy =
      0.5 * (state.cov() + RealMatrix::Identity(dim, dim));
  Xoshiro256pp rng(rng_seed);
  return SampleBatch{dim, count, detail::gaussian_rows(state.mean(), noisy, count, rng),
                     rng_seed};
}

//! Homodyne detection of one quadrature per mode (the set commutes, so the
//! joint outcome law is the plain restriction): N(mean_sel, cov_sel / 2).
inline SampleBatch homodyne(const GaussianState& state, QuadratureOrientation quadrature,
                            std::int64_t count, std::uint64_t rng_seed) {
  if (count < 1) throw InvalidArgument("homodyne: count must be >= 1");
  const int m = state.modes();
  std::vector<int> sel(static_cast<std::size_t>(m));
  const int offset = (quadrature == QuadratureOrientation::position) ? 0 : 1;
  for (int i = 0; i < m; ++i) sel[static_cast<std::size_t>(i)] = 2 * i + offset;
  const RealVector mean = detail::select(state.mean(), sel);
  const RealMatrix cov = 0.5 * detail::select(state.cov(), sel);
  Xoshiro256pp rng(rng_seed);
  return SampleBatch{m, count, detail::gaussian_rows(mean, cov, count, rng), rng_seed};
}

//! Marginal state on an arbitrary set of distinct modes, in the order given.
inline GaussianState marginal(const GaussianState& state, const std::vector<int>& mode_indices) {
  if (mode_indices.empty()) throw InvalidArgument("marginal: empty mode list");
  std::vector<int> sorted = mode_indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("marginal: mode indices must be distinct");
  if (sorted.front() < 0 || sorted.back() >= state.modes())
    throw InvalidArgument("marginal: mode index out of range");
  std::vector<int> sel;
  sel.reserve(2 * mode_indices.size());
  for (int mode : mode_indices) {
    sel.push_back(2 * mode);
    sel.push_back(2 * mode + 1);
  }
  return GaussianState(detail::select(state.mean(), sel),
                       detail::select(state.cov(), sel));
}

//! Analytic mean and covariance of a measurement pipeline's output.
struct PipelineMoments {
  RealVector mean;
  RealMatrix cov;
};

namespace detail {

//! The passive scheme reduced to its homodyne outcome law plus the linear
//! post-processing: outcome ~ N(homodyne_mean, homodyne_cov); each output
//! row is post * outcome.
struct PassivePipeline {
  RealVector homodyne_mean;
  RealMatrix homodyne_cov;
  RealMatrix post;
};

inline PassivePipeline passive_pipeline(const GaussianState& state,
                                        const SymplecticMatrix& s) {
  const int m = state.modes();
  if (s.modes() != m)
    throw InvalidArgument("passive_heterodyne: mode counts do not match");
  const int dim = 2 * m;

  // Auxiliary squeezed vacuum with covariance S^{-1} S^{-T}, conjugated by
  // the per-mode phase flip so that the x/p output assignment below
  // reproduces plain heterodyne exactly when S is the identity.
  const RealMatrix sinv = s.inverse();
  const RealMatrix flip = phase_conjugation(m);
  const RealMatrix ancilla_cov = flip * sinv * sinv.transpose() * flip;

  // Balanced beam splitter across the (input | ancilla) register split.
  const double c = 1.0 / std::sqrt(2.0);
  RealMatrix joint_mean_map = RealMatrix::Zero(2 * dim, 2 * dim);
  joint_mean_map.topLeftCorner(dim, dim) = c * RealMatrix::Identity(dim, dim);
  joint_mean_map.topRightCorner(dim, dim) = c * RealMatrix::Identity(dim, dim);
  joint_mean_map.bottomLeftCorner(dim, dim) = c * RealMatrix::Identity(dim, dim);
  joint_mean_map.bottomRightCorner(dim, dim) = -c * RealMatrix::Identity(dim, dim);

  RealVector mu = RealVector::Zero(2 * dim);
  mu.head(dim) = state.mean();
  RealMatrix v = RealMatrix::Zero(2 * dim, 2 * dim);
  v.topLeftCorner(dim, dim) = state.cov();
  v.bottomRightCorner(dim, dim) = ancilla_cov;
  mu = joint_mean_map * mu;
  v = joint_mean_map * v * joint_mean_map.transpose();

  // Commuting homodyne set: position on the first output arm, momentum on
  // the second, interleaved back into (x_1, p_1, ...) order.
  std::vector<int> sel(static_cast<std::size_t>(dim));
  for (int i = 0; i < m; ++i) {
    sel[static_cast<std::size_t>(2 * i)] = 2 * i;
    sel[static_cast<std::size_t>(2 * i + 1)] = dim + 2 * i + 1;
  }

  PassivePipeline out;
  out.homodyne_mean = select(mu, sel);
  out.homodyne_cov = 0.5 * select(v, sel);
  // q := sqrt(2) (x, p), then post-process with S.
  out.post = std::sqrt(2.0) * s.matrix();
  return out;
}

} // namespace detail

//! Analytic outcome law of the passive scheme (for validation against the
//! direct heterodyne-after-unitary law).
inline PipelineMoments passive_pipeline_moments(const GaussianState& state,
                                                const SymplecticMatrix& s) {
  const detail::PassivePipeline pipe = detail::passive_pipeline(state, s);
  return PipelineMoments{pipe.post * pipe.homodyne_mean,
                         pipe.post * pipe.homodyne_cov * pipe.post.transpose()};
}

//! The passive realization of heterodyne-after-U_S: interfere with the
//! squeezed ancilla, homodyne both arms, rescale by sqrt(2), post-process
//! with S.  Equal in distribution to heterodyne(apply_unitary((0,S), state)).
inline SampleBatch passive_heterodyne(const GaussianState& state, const SymplecticMatrix& s,
                                      std::int64_t count, std::uint64_t rng_seed) {
  if (count < 1) throw InvalidArgument("passive_heterodyne: count must be >= 1");
  const detail::PassivePipeline pipe = detail::passive_pipeline(state, s);
  Xoshiro256pp rng(rng_seed);
  RealMatrix rows =
      detail::gaussian_rows(pipe.homodyne_mean, pipe.homodyne_cov, count, rng);
  rows = rows * pipe.post.transpose();
  return SampleBatch{static_cast<int>(rows.cols()), count, std::move(rows), rng_seed};
}

// ---------------------------------------------------------------------------
// Sampling policy for learners
// ---------------------------------------------------------------------------

//! How a learner turns an outcome law plus a shot count into the statistic
//! it consumes (always the sample mean):
//!  - per_shot: draw every shot and average (switches to aggregated above
//!    kAggregationThreshold shots to keep huge budgets tractable);
//!  - aggregated: draw the sample mean directly from its exact law
//!    N(mean, cov/N) — the mean of N i.i.d. normals is itself normal;
//!  - exact_mean: return the analytic mean (deterministic test hook).
enum class SamplerMode { per_shot, aggregated, exact_mean };

//! Shot count above which per_shot sampling upgrades to aggregated.
inline constexpr std::int64_t kAggregationThreshold = 1'000'000;

//! Sample mean of `count` i.i.d. draws from N(mean, cov), under the policy.
inline RealVector gaussian_mean_estimate(const RealVector& mean, const RealMatrix& cov,
                                         std::int64_t count, Xoshiro256pp& rng,
                                         SamplerMode mode) {
  if (count < 1) throw InvalidArgument("gaussian_mean_estimate: count must be >= 1");
  if (mode == SamplerMode::exact_mean) return mean;
  if (mode == SamplerMode::per_shot && count <= kAggregationThreshold) {
    const RealMatrix rows = detail::gaussian_rows(mean, cov, count, rng);
    return rows.colwise().mean().transpose();
  }
  // Aggregated: mean + L z / sqrt(N) with L L^T = cov.
  const RealMatrix l = detail::gaussian_factor(cov);
  RealVector z(mean.size());
  for (int j = 0; j < z.size(); ++j) z(j) = rng.normal();
  return mean + (l * z) / std::sqrt(static_cast<double>(count));
}

//! Sample mean of `count` i.i.d. draws from N(mean, F F^T), with the factor F
//! supplied directly (it may have more columns than rows).  Used where forming
//! the covariance explicitly would square a large cancellation that the factor
//! only takes linearly, e.g. undoing a strong squeezer on a measured register.
inline RealVector gaussian_mean_estimate_from_factor(const RealVector& mean,
                                                     const RealMatrix& factor,
                                                     std::int64_t count, Xoshiro256pp& rng,
                                                     SamplerMode mode) {
  if (count < 1)
    throw InvalidArgument("gaussian_mean_estimate_from_factor: count must be >= 1");
  if (factor.rows() != mean.size())
    throw InvalidArgument("gaussian_mean_estimate_from_factor: factor rows must match mean size");
  if (mode == SamplerMode::exact_mean) return mean;
  const Eigen::Index k = factor.cols();
  RealVector z(k);
  if (mode == SamplerMode::per_shot && count <= kAggregationThreshold) {
    // Averaging the standard-normal inputs first and applying F once is
    // distributionally identical to averaging F z_i, by linearity.
    z.setZero();
    for (std::int64_t shot = 0; shot < count; ++shot)
      for (Eigen::Index j = 0; j < k; ++j) z(j) += rng.normal();
    z /= static_cast<double>(count);
  } else {
    for (Eigen::Index j = 0; j < k; ++j) z(j) = rng.normal();
    z /= std::sqrt(static_cast<double>(count));
  }
  return mean + factor * z;
}

} // namespace symplearn

#endif // SYMPLEARN_MEASUREMENT_HPP
