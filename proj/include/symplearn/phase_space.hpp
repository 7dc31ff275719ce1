//! @file phase_space.hpp
//! @brief Gaussian states and unitaries as moment pairs (mean, covariance).
//!
//! A Gaussian state is fully described by its first moment (mean quadrature
//! vector) and covariance matrix; a Gaussian unitary acts as an affine map
//! on those moments: mean -> S mean + r, cov -> S cov S^T.  Units follow the
//! hbar = 1 convention in which the vacuum covariance is the identity.
//!
//! Multi-register states are ordered (signal block | ancilla block), with
//! the interleaved (x_1, p_1, ...) quadrature ordering inside each block.

#ifndef SYMPLEARN_PHASE_SPACE_HPP
#define SYMPLEARN_PHASE_SPACE_HPP

#include <cmath>
#include <sstream>
#include <utility>

#include "symplearn/errors.hpp"
#include "symplearn/symplectic.hpp"

namespace symplearn {

//! A Gaussian state, validated on construction: the covariance must be
//! symmetric, positive definite up to roundoff, and satisfy the uncertainty
//! relation cov + i Omega >= 0 (up to a small tolerance).
class GaussianState {
public:
  GaussianState(RealVector mean, RealMatrix cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {
    const int dim = static_cast<int>(cov_.rows());
    if (cov_.cols() != dim || dim % 2 != 0 || dim == 0)
      throw StructureError("GaussianState: covariance must be square with even size");
    if (mean_.size() != dim)
      throw StructureError("GaussianState: mean length does not match covariance size");
    if (!mean_.allFinite() || !cov_.allFinite())
      throw StructureError("GaussianState: non-finite moments");

    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw StructureError("GaussianState: covariance is not symmetric");
    cov_ = 0.5 * (cov_ + cov_.transpose());

    // Both eigenvalue floors are relative to the covariance scale: computed
    // eigenvalues carry absolute error on the order of machine epsilon times
    // the matrix norm, and pure states saturate the uncertainty relation
    // exactly, so an absolute floor would reject legitimate strongly squeezed
    // states on roundoff alone.
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(cov_);
    if (eig.info() != Eigen::Success)
      throw NumericError("GaussianState: eigendecomposition of covariance failed");
    if (eig.eigenvalues().minCoeff() <= -1e-10 * scale)
      throw StructureError("GaussianState: covariance is not positive semidefinite");

    // Uncertainty relation: cov + i Omega must be positive semidefinite.
    const RealMatrix w = omega(dim / 2);
    Eigen::MatrixXcd unc = cov_.cast<std::complex<double>>();
    unc += std::complex<double>(0.0, 1.0) * w.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ueig(unc);
    if (ueig.info() != Eigen::Success)
      throw NumericError("GaussianState: uncertainty eigendecomposition failed");
    if (ueig.eigenvalues().minCoeff() < -1e-8 * scale) {
      std::ostringstream msg;
      msg << "GaussianState: uncertainty relation violated (min eigenvalue "
          << ueig.eigenvalues().minCoeff() << ")";
      throw StructureError(msg.str());
    }
  }

  const RealVector& mean() const { return mean_; }
  const RealMatrix& cov() const { return cov_; }
  int modes() const { return static_cast<int>(cov_.rows()) / 2; }
  int dim() const { return static_cast<int>(cov_.rows()); }

private:
  RealVector mean_;
  RealMatrix cov_;
};

//! A Gaussian unitary: displacement by r composed after the symplectic
//! action of S (mean -> S mean + r, cov -> S cov S^T).
class GaussianUnitary {
public:
  GaussianUnitary(RealVector r, SymplecticMatrix s) : r_(std::move(r)), s_(std::move(s)) {
    if (r_.size() != s_.dim())
      throw StructureError("GaussianUnitary: displacement length does not match matrix size");
    if (!r_.allFinite()) throw StructureError("GaussianUnitary: non-finite displacement");
  }

  static GaussianUnitary identity(int modes) {
    return GaussianUnitary(RealVector::Zero(2 * modes),
                           SymplecticMatrix(RealMatrix::Identity(2 * modes, 2 * modes)));
  }

  //! Purely symplectic element (zero displacement).
  static GaussianUnitary from_symplectic(SymplecticMatrix s) {
    const int dim = s.dim();
    return GaussianUnitary(RealVector::Zero(dim), std::move(s));
  }

  //! Pure displacement (identity symplectic part).
  static GaussianUnitary displacement(RealVector r) {
    const auto dim = r.size();
    if (dim % 2 != 0 || dim == 0)
      throw InvalidArgument("GaussianUnitary::displacement: length must be even");
    return GaussianUnitary(std::move(r), SymplecticMatrix(RealMatrix::Identity(dim, dim)));
  }

  const RealVector& r() const { return r_; }
  const SymplecticMatrix& s() const { return s_; }
  int modes() const { return s_.modes(); }

  //! The inverse element: (r, S)^{-1} = (-S^{-1} r, S^{-1}).
  GaussianUnitary inverse() const {
    const RealMatrix sinv = s_.inverse();
    return GaussianUnitary(-(sinv * r_), SymplecticMatrix(sinv));
  }

private:
  RealVector r_;
  SymplecticMatrix s_;
};

//! Group composition: (compose(a, b)) acts as "apply b first, then a",
//! giving (r_a + S_a r_b, S_a S_b).
inline GaussianUnitary compose(const GaussianUnitary& a, const GaussianUnitary& b) {
  if (a.modes() != b.modes())
    throw InvalidArgument("compose: mode counts do not match");
  return GaussianUnitary(a.r() + a.s().matrix() * b.r(),
                         SymplecticMatrix(a.s().matrix() * b.s().matrix()));
}

//! Moment transformation: mean -> S mean + r, cov -> S cov S^T.
inline GaussianState apply_unitary(const GaussianUnitary& g, const GaussianState& state) {
  if (g.modes() != state.modes())
    throw InvalidArgument("apply_unitary: mode counts do not match");
  const RealMatrix& s = g.s().matrix();
  // The exact conjugated covariance is symmetric; symmetrize away the
  // floating-point asymmetry of the evaluated product.
  const RealMatrix c = s * state.cov() * s.transpose();
  return GaussianState(s * state.mean() + g.r(), 0.5 * (c + c.transpose()));
}

// ---------------------------------------------------------------------------
// Standard states
// ---------------------------------------------------------------------------

//! n-mode vacuum: zero mean, identity covariance.
inline GaussianState vacuum(int modes) {
  if (modes <= 0) throw InvalidArgument("vacuum: modes must be positive");
  return GaussianState(RealVector::Zero(2 * modes),
                       RealMatrix::Identity(2 * modes, 2 * modes));
}

//! Coherent state with the given mean quadrature vector (identity covariance).
inline GaussianState coherent(const RealVector& mean) {
  if (mean.size() % 2 != 0 || mean.size() == 0)
    throw InvalidArgument("coherent: mean length must be even and positive");
  const auto dim = mean.size();
  return GaussianState(mean, RealMatrix::Identity(dim, dim));
}

//! Which quadrature carries the anti-squeezing (variance growth).
enum class QuadratureOrientation { momentum, position };

//! Product of n single-mode squeezed vacua.  Momentum orientation has
//! covariance diag(z, 1/z) per mode (position anti-squeezed, momentum
//! squeezed); position orientation is the transpose profile diag(1/z, z).
inline GaussianState single_mode_squeezed(double z_in, int modes,
                                          QuadratureOrientation orientation) {
  if (modes <= 0) throw InvalidArgument("single_mode_squeezed: modes must be positive");
  if (!(z_in >= 1.0))
    throw InvalidArgument("single_mode_squeezed: squeezing parameter must be >= 1");
  RealVector d(2 * modes);
  for (int j = 0; j < modes; ++j) {
    const bool momentum = (orientation == QuadratureOrientation::momentum);
    d(2 * j) = momentum ? z_in : 1.0 / z_in;
    d(2 * j + 1) = momentum ? 1.0 / z_in : z_in;
  }
  return GaussianState(RealVector::Zero(2 * modes), RealMatrix(d.asDiagonal()));
}

//! The two-mode squeezing symplectic on m pairs, in (signal | ancilla)
//! block form: [[sqrt(nu) 1, sqrt(nu-1) Z], [sqrt(nu-1) Z, sqrt(nu) 1]].
inline RealMatrix tmsv_symplectic(double nu, int pairs) {
  if (pairs <= 0) throw InvalidArgument("tmsv_symplectic: pairs must be positive");
  if (!(nu >= 1.0)) throw InvalidArgument("tmsv_symplectic: nu must be >= 1");
  const int half = 2 * pairs;
  const RealMatrix z = phase_conjugation(pairs);
  RealMatrix s(2 * half, 2 * half);
  s.topLeftCorner(half, half) = std::sqrt(nu) * RealMatrix::Identity(half, half);
  s.bottomRightCorner(half, half) = std::sqrt(nu) * RealMatrix::Identity(half, half);
  s.topRightCorner(half, half) = std::sqrt(nu - 1.0) * z;
  s.bottomLeftCorner(half, half) = std::sqrt(nu - 1.0) * z;
  return s;
}

//! Closed-form inverse of tmsv_symplectic: same blocks with the sign of the
//! off-diagonal coupling flipped.
inline RealMatrix tmsv_symplectic_inverse(double nu, int pairs) {
  if (pairs <= 0) throw InvalidArgument("tmsv_symplectic_inverse: pairs must be positive");
  if (!(nu >= 1.0)) throw InvalidArgument("tmsv_symplectic_inverse: nu must be >= 1");
  const int half = 2 * pairs;
  RealMatrix s = tmsv_symplectic(nu, pairs);
  s.topRightCorner(half, half) *= -1.0;
  s.bottomLeftCorner(half, half) *= -1.0;
  return s;
}

//! m pairs of two-mode squeezed vacuum: a 2m-mode state whose first m modes
//! (signal) are each entangled with the corresponding ancilla mode; the
//! covariance is S_nu S_nu^T.
inline GaussianState tmsv(double nu, int pairs) {
  const RealMatrix s = tmsv_symplectic(nu, pairs);
  return GaussianState(RealVector::Zero(4 * pairs), s * s.transpose());
}

//! Extend a unitary to act on the first G.m modes of a larger register:
//! block-diag(S, 1) with zero displacement on the added ancilla block.
inline GaussianUnitary embed_on_first_modes(const GaussianUnitary& g, int total_modes) {
  const int m = g.modes();
  if (total_modes < m)
    throw InvalidArgument("embed_on_first_modes: total modes smaller than the unitary");
  if (total_modes == m) return g;
  const int dim = 2 * total_modes;
  RealMatrix s = RealMatrix::Identity(dim, dim);
  s.topLeftCorner(2 * m, 2 * m) = g.s().matrix();
  RealVector r = RealVector::Zero(dim);
  r.head(2 * m) = g.r();
  return GaussianUnitary(std::move(r), SymplecticMatrix(std::move(s)));
}

//! Marginal state of a contiguous block of modes [first, first + count).
inline GaussianState marginal(const GaussianState& state, int first_mode, int mode_count) {
  if (first_mode < 0 || mode_count <= 0 || first_mode + mode_count > state.modes())
    throw InvalidArgument("marginal: mode range out of bounds");
  const int off = 2 * first_mode, len = 2 * mode_count;
  return GaussianState(state.mean().segment(off, len), state.cov().block(off, off, len, len));
}

//! Mean photon number: Tr[V - 1]/4 + ||mean||^2 / 2.
inline double mean_photon_number(const GaussianState& state) {
  const double tr = state.cov().trace() - static_cast<double>(state.dim());
  return tr / 4.0 + 0.5 * state.mean().squaredNorm();
}

// ---------------------------------------------------------------------------
// Analytic moments of the entangled displacement-learning protocol
// ---------------------------------------------------------------------------

//! Output moments of the pipeline
//!   |nu>^{tensor m}  ->  embedded U_{S_tilde^{-1}}  ->  G_{r,S}  ->  U_{S_nu^{-1}}
//! in (signal | ancilla) block form: mean (mean_signal, mean_ancilla) and
//! covariance [[A, C], [C^T, B]].
struct ProtocolMoments {
  RealVector mean_signal;  //!< equals sqrt(nu) r
  RealVector mean_ancilla; //!< equals -sqrt(nu-1) Z r
  RealMatrix A;            //!< signal covariance block
  RealMatrix B;            //!< ancilla covariance block
  RealMatrix C;            //!< signal-ancilla cross block
  RealMatrix W;            //!< the net symplectic of the pipeline

  RealMatrix full_covariance() const {
    const auto half = A.rows();
    RealMatrix v(2 * half, 2 * half);
    v.topLeftCorner(half, half) = A;
    v.topRightCorner(half, half) = C;
    v.bottomLeftCorner(half, half) = C.transpose();
    v.bottomRightCorner(half, half) = B;
    return v;
  }

  RealVector full_mean() const {
    RealVector mu(mean_signal.size() + mean_ancilla.size());
    mu << mean_signal, mean_ancilla;
    return mu;
  }
};

//! Compute the protocol's output moments by direct composition: the net
//! symplectic is W = S_nu^{-1} diag(S, 1) diag(S_tilde^{-1}, 1) S_nu, the
//! output mean is S_nu^{-1} (r, 0), and the output covariance is W W^T.
inline ProtocolMoments tmsv_protocol_moments(const RealVector& r, const SymplecticMatrix& s,
                                             const SymplecticMatrix& s_tilde, double nu) {
  const int m = s.modes();
  if (s_tilde.modes() != m)
    throw InvalidArgument("tmsv_protocol_moments: mode counts do not match");
  if (r.size() != 2 * m)
    throw InvalidArgument("tmsv_protocol_moments: displacement length must be 2m");
  if (!(nu >= 1.0)) throw InvalidArgument("tmsv_protocol_moments: nu must be >= 1");

  const int half = 2 * m;
  const RealMatrix snu = tmsv_symplectic(nu, m);
  const RealMatrix snu_inv = tmsv_symplectic_inverse(nu, m);

  RealMatrix mid = RealMatrix::Identity(2 * half, 2 * half);
  mid.topLeftCorner(half, half) = s.matrix() * s_tilde.inverse();

  const RealMatrix w = snu_inv * mid * snu;
  RealVector padded = RealVector::Zero(2 * half);
  padded.head(half) = r;
  const RealVector mean = snu_inv * padded;
  const RealMatrix cov = w * w.transpose();

  ProtocolMoments out;
  out.mean_signal = mean.head(half);
  out.mean_ancilla = mean.tail(half);
  out.A = cov.topLeftCorner(half, half);
  out.B = cov.bottomRightCorner(half, half);
  out.C = cov.topRightCorner(half, half);
  out.W = w;
  return out;
}

} // namespace symplearn

#endif // SYMPLEARN_PHASE_SPACE_HPP
