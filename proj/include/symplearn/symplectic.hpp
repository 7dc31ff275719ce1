//! @file symplectic.hpp
//! @brief Symplectic linear algebra on the interleaved quadrature ordering.
//!
//! Conventions used throughout the library:
//!  - Quadratures are ordered (x_1, p_1, x_2, p_2, ..., x_m, p_m).
//!  - The symplectic form is Omega = direct sum of m copies of [[0,1],[-1,0]].
//!  - S is symplectic iff S^T Omega S = Omega.
//!  - ||.|| written "operator norm" is the largest singular value.
//!
//! The module provides the checked SymplecticMatrix wrapper, the Euler
//! (orthogonal * diagonal * orthogonal) factorization, Haar-random sampling
//! of symplectic-orthogonal matrices, the matrix principal square root, and
//! the projection of a near-symplectic matrix back onto the group
//! ("regularization").

#ifndef SYMPLEARN_SYMPLECTIC_HPP
#define SYMPLEARN_SYMPLECTIC_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "symplearn/errors.hpp"
#include "symplearn/rng.hpp"

namespace symplearn {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

//! Default tolerance for "is this matrix symplectic" checks.
inline constexpr double kSymplecticTol = 1e-10;

//! Largest singular value (spectral / operator norm).
inline double operator_norm(const RealMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<RealMatrix> svd(a);
  return svd.singularValues()(0);
}

//! The symplectic form Omega on m modes (2m x 2m, interleaved ordering).
inline RealMatrix omega(int modes) {
  if (modes <= 0) throw InvalidArgument("omega: modes must be positive");
  RealMatrix w = RealMatrix::Zero(2 * modes, 2 * modes);
  for (int j = 0; j < modes; ++j) {
    w(2 * j, 2 * j + 1) = 1.0;
    w(2 * j + 1, 2 * j) = -1.0;
  }
  return w;
}

//! Direct sum of m copies of diag(1, -1): flips the sign of every momentum
//! quadrature.  Used by the two-mode-squeezed constructions and by the
//! passive heterodyne realization.
inline RealMatrix phase_conjugation(int modes) {
  if (modes <= 0) throw InvalidArgument("phase_conjugation: modes must be positive");
  RealVector d(2 * modes);
  for (int j = 0; j < modes; ++j) {
    d(2 * j) = 1.0;
    d(2 * j + 1) = -1.0;
  }
  return d.asDiagonal();
}

//! Operator-norm distance of S^T Omega S from Omega.
inline double symplectic_residual(const RealMatrix& s) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0 || s.rows() == 0)
    throw InvalidArgument("symplectic_residual: matrix must be square with even size");
  const RealMatrix w = omega(static_cast<int>(s.rows()) / 2);
  return operator_norm(s.transpose() * w * s - w);
}

//! True when ||S^T Omega S - Omega|| <= tol.
inline bool is_symplectic(const RealMatrix& s, double tol = kSymplecticTol) {
  return symplectic_residual(s) <= tol;
}

//! A square real matrix verified to be symplectic at construction.  The
//! residual ||S^T Omega S - Omega|| is compared against tol * max(1, ||S||^2)
//! because even an exactly symplectic S evaluates the defining product with
//! roundoff proportional to ||S||^2 (strong squeezing must not be rejected
//! for floating-point reasons).
class SymplecticMatrix {
public:
  explicit SymplecticMatrix(RealMatrix s, double tol = kSymplecticTol) : s_(std::move(s)) {
    if (s_.rows() != s_.cols() || s_.rows() % 2 != 0 || s_.rows() == 0)
      throw StructureError("SymplecticMatrix: matrix must be square with even size");
    const double res = symplectic_residual(s_);
    const double scale = std::max(1.0, operator_norm(s_));
    if (!(res <= tol * scale * scale)) {
      std::ostringstream msg;
      msg << "SymplecticMatrix: symplectic residual " << res << " exceeds tolerance "
          << tol * scale * scale;
      throw StructureError(msg.str());
    }
  }

  const RealMatrix& matrix() const { return s_; }
  int modes() const { return static_cast<int>(s_.rows()) / 2; }
  int dim() const { return static_cast<int>(s_.rows()); }

  //! Closed-form symplectic inverse: S^{-1} = -Omega S^T Omega.
  RealMatrix inverse() const {
    const RealMatrix w = omega(modes());
    return -w * s_.transpose() * w;
  }

private:
  RealMatrix s_;
};

// ---------------------------------------------------------------------------
// Passive (symplectic-orthogonal) sampling via the unitary correspondence
// ---------------------------------------------------------------------------

//! Real 2m x 2m representation of an m x m complex matrix U = X + iY:
//! block (j,k) = [[X_jk, -Y_jk], [Y_jk, X_jk]].  If U is unitary the result
//! is orthogonal and symplectic (it commutes with Omega).
inline RealMatrix real_representation(const ComplexMatrix& u) {
  const int m = static_cast<int>(u.rows());
  if (u.cols() != m || m == 0)
    throw InvalidArgument("real_representation: matrix must be square");
  RealMatrix o(2 * m, 2 * m);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const double re = u(j, k).real();
      const double im = u(j, k).imag();
      o(2 * j, 2 * k) = re;
      o(2 * j, 2 * k + 1) = -im;
      o(2 * j + 1, 2 * k) = im;
      o(2 * j + 1, 2 * k + 1) = re;
    }
  }
  return o;
}

//! Inverse of real_representation restricted to the commuting part: averages
//! the 2x2 blocks of O into one complex entry per block.
inline ComplexMatrix complex_from_real(const RealMatrix& o) {
  const int n = static_cast<int>(o.rows());
  if (o.cols() != n || n % 2 != 0 || n == 0)
    throw InvalidArgument("complex_from_real: matrix must be square with even size");
  const int m = n / 2;
  ComplexMatrix u(m, m);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const double re = 0.5 * (o(2 * j, 2 * k) + o(2 * j + 1, 2 * k + 1));
      const double im = 0.5 * (o(2 * j + 1, 2 * k) - o(2 * j, 2 * k + 1));
      u(j, k) = std::complex<double>(re, im);
    }
  }
  return u;
}

//! Haar-random m x m unitary: complex Ginibre matrix, QR, then fix the phases
//! of the R diagonal so the distribution is exactly Haar.
inline ComplexMatrix haar_unitary(int m, Xoshiro256pp& rng) {
  if (m <= 0) throw InvalidArgument("haar_unitary: dimension must be positive");
  ComplexMatrix g(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      g(j, k) = std::complex<double>(rng.normal(), rng.normal());
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    const std::complex<double> d = r(j, j);
    const double mag = std::abs(d);
    const std::complex<double> phase = (mag > 0.0) ? d / mag : std::complex<double>(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

//! Haar-random element of Sp(2m) intersected with O(2m) (a "passive"
//! transformation), as the real representation of a Haar unitary.
inline RealMatrix random_symplectic_orthogonal(int modes, Xoshiro256pp& rng) {
  return real_representation(haar_unitary(modes, rng));
}

//! Nearest symplectic-orthogonal matrix to O: extract the commuting complex
//! part, unitarize it by polar projection (SVD), and map back.  Used to
//! polish factors that are within roundoff of the group.
inline RealMatrix project_symplectic_orthogonal(const RealMatrix& o) {
  const ComplexMatrix u = complex_from_real(o);
  Eigen::JacobiSVD<ComplexMatrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const ComplexMatrix unitary = svd.matrixU() * svd.matrixV().adjoint();
  return real_representation(unitary);
}

// ---------------------------------------------------------------------------
// Euler factorization  S = O1 * Z * O2
// ---------------------------------------------------------------------------

//! Result of euler_decompose: S = O1 * Z * O2 with O1, O2 symplectic
//! orthogonal and Z = diag(z_1, 1/z_1, ..., z_m, 1/z_m), z_1 >= ... >= z_m >= 1.
struct EulerFactors {
  RealMatrix O1;
  RealMatrix Z;
  RealMatrix O2;
  RealVector z; //!< the per-mode squeezing values, descending, z_j >= 1
};

//! Euler (Bloch-Messiah) factorization of a symplectic matrix.
//!
//! Strategy: diagonalize the positive definite symplectic matrix S S^T.  Its
//! eigenvalues come in reciprocal pairs (s^2, s^{-2}) with eigenvector pairs
//! exchanged by Omega, so picking the eigenvector u for each eigenvalue on
//! the >= 1 side and completing the mode with w = -Omega u yields the
//! symplectic-orthogonal diagonalizer O1.  Both factors are polished onto
//! Sp(2m) and checked against the reconstruction contract.
//!
//! Throws DecompositionError when the factorization cannot be certified to
//! ||O1 Z O2 - S|| <= 1e-8 with orthogonal factors.
inline EulerFactors euler_decompose(const RealMatrix& s) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n || n % 2 != 0 || n == 0)
    throw InvalidArgument("euler_decompose: matrix must be square with even size");
  const int m = n / 2;
  if (!is_symplectic(s, 1e-8))
    throw StructureError("euler_decompose: input is not symplectic");

  const RealMatrix w = omega(m);
  const RealMatrix gram = 0.5 * (s * s.transpose() + (s * s.transpose()).transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericError("euler_decompose: eigendecomposition failed");

  // Singular values of S, with eigenvectors, sorted descending.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const RealVector lambda = eig.eigenvalues();
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lambda(a) > lambda(b); });

  RealMatrix o1(n, n);
  RealVector z(m);
  std::vector<bool> active(n, true);
  int pair = 0;
  for (int step = 0; step < n && pair < m; ++step) {
    const int k = order[step];
    if (!active[k]) continue;
    active[k] = false;

    // Take the eigenvector with the largest remaining singular value and
    // orthogonalize it against the pairs already chosen (a no-op up to
    // roundoff; near-degenerate spectra make it load-bearing).
    RealVector u = eig.eigenvectors().col(k);
    for (int c = 0; c < 2 * pair; ++c) u -= o1.col(c).dot(u) * o1.col(c);
    const double unorm = u.norm();
    if (unorm < 0.5) continue; // direction already consumed by an earlier mode
    u /= unorm;

    // Complete the mode: w = -Omega u is the partner with reciprocal
    // singular value, and (u, w) is orthonormal with u^T Omega w = 1.
    RealVector wcol = -(w * u);
    for (int c = 0; c < 2 * pair; ++c) wcol -= o1.col(c).dot(wcol) * o1.col(c);
    wcol -= u.dot(wcol) * u;
    const double wnorm = wcol.norm();
    if (wnorm < 0.5)
      throw DecompositionError("euler_decompose: could not complete a symplectic mode pair");
    wcol /= wnorm;

    // Retire the pool vector that this w consumed.
    int partner = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const double overlap = std::abs(eig.eigenvectors().col(i).dot(wcol));
      if (overlap > best) {
        best = overlap;
        partner = i;
      }
    }
    if (partner >= 0) active[partner] = false;

    o1.col(2 * pair) = u;
    o1.col(2 * pair + 1) = wcol;
    z(pair) = std::sqrt(std::max(lambda(k), 0.0));
    ++pair;
  }
  if (pair != m)
    throw DecompositionError("euler_decompose: mode pairing did not span the space");

  o1 = project_symplectic_orthogonal(o1);

  RealVector zdiag(n);
  for (int j = 0; j < m; ++j) {
    if (!(z(j) > 0.0) || !std::isfinite(z(j)))
      throw DecompositionError("euler_decompose: invalid singular value");
    zdiag(2 * j) = z(j);
    zdiag(2 * j + 1) = 1.0 / z(j);
  }
  const RealMatrix zmat = zdiag.asDiagonal();
  const RealMatrix o2 = project_symplectic_orthogonal(
      zdiag.cwiseInverse().asDiagonal() * o1.transpose() * s);

  // Contract check: reconstruction and factor quality.
  const double recon = operator_norm(o1 * zmat * o2 - s);
  const double q1 = operator_norm(o1.transpose() * o1 - RealMatrix::Identity(n, n));
  const double q2 = operator_norm(o2.transpose() * o2 - RealMatrix::Identity(n, n));
  if (recon > 1e-8 || q1 > kSymplecticTol || q2 > kSymplecticTol ||
      !is_symplectic(o1, kSymplecticTol) || !is_symplectic(o2, kSymplecticTol)) {
    std::ostringstream msg;
    msg << "euler_decompose: contract violated (reconstruction " << recon
        << ", orthogonality " << q1 << " / " << q2 << ")";
    throw DecompositionError(msg.str());
  }
  return EulerFactors{o1, zmat, o2, z};
}

//! Random symplectic matrix O1 * Z * O2 with Haar passive factors and
//! squeezing values drawn log-uniformly from [1, z_max]; the first value is
//! pinned to z_max so the operator norm of the sample is exactly z_max.
inline SymplecticMatrix random_symplectic(int modes, double z_max, Xoshiro256pp& rng) {
  if (modes <= 0) throw InvalidArgument("random_symplectic: modes must be positive");
  if (!(z_max >= 1.0)) throw InvalidArgument("random_symplectic: z_max must be >= 1");
  const RealMatrix o1 = random_symplectic_orthogonal(modes, rng);
  const RealMatrix o2 = random_symplectic_orthogonal(modes, rng);
  RealVector zdiag(2 * modes);
  for (int j = 0; j < modes; ++j) {
    const double zj = (j == 0) ? z_max : std::exp(rng.uniform(0.0, std::log(z_max)));
    zdiag(2 * j) = zj;
    zdiag(2 * j + 1) = 1.0 / zj;
  }
  return SymplecticMatrix(o1 * zdiag.asDiagonal() * o2);
}

// ---------------------------------------------------------------------------
// Principal matrix square root
// ---------------------------------------------------------------------------

struct SqrtOptions {
  double tol = 1e-12;        //!< relative residual target ||Q^2-T|| <= tol*max(1,||T||)
  int max_iterations = 100;  //!< iteration cap for the coupled iteration
  bool enforce_domain = true; //!< require ||T - 1|| < 1 before iterating
};

namespace detail {

//! Principal square root via dense eigendecomposition; used as the fallback
//! when the coupled iteration stalls.  Requires the spectrum to avoid the
//! closed negative real axis.
inline RealMatrix eigen_sqrt(const RealMatrix& t) {
  Eigen::EigenSolver<RealMatrix> eig(t);
  if (eig.info() != Eigen::Success)
    throw NumericError("principal_sqrt: eigendecomposition failed");
  const Eigen::VectorXcd vals = eig.eigenvalues();
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  Eigen::VectorXcd roots(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const std::complex<double> v = vals(i);
    if (v.real() <= 0.0 && std::abs(v.imag()) <= 1e-12 * scale)
      throw SqrtDomainError(
          "principal_sqrt: eigenvalue on the closed negative real axis");
    roots(i) = std::sqrt(v);
  }
  const ComplexMatrix vecs = eig.eigenvectors();
  const ComplexMatrix q = vecs * roots.asDiagonal() * vecs.inverse();
  return q.real();
}

} // namespace detail

//! Principal square root of a real square matrix.
//!
//! Uses the determinant-scaled Denman-Beavers coupled iteration
//!     Y <- (mu Y + (mu Z)^{-1}) / 2,   Z <- (mu Z + (mu Y)^{-1}) / 2
//! which converges quadratically to (sqrt(T), T^{-1/2}).  When
//! enforce_domain is set (the default) the input must satisfy ||T - 1|| < 1,
//! which guarantees the principal root exists; disabling the gate admits any
//! matrix whose spectrum avoids the closed negative real axis, with a dense
//! eigendecomposition fallback if the iteration stalls.
inline RealMatrix principal_sqrt(const RealMatrix& t, const SqrtOptions& opts = {}) {
  const int n = static_cast<int>(t.rows());
  if (t.cols() != n || n == 0)
    throw InvalidArgument("principal_sqrt: matrix must be square");
  if (!t.allFinite())
    throw InvalidArgument("principal_sqrt: matrix has non-finite entries");

  const RealMatrix identity = RealMatrix::Identity(n, n);
  if (opts.enforce_domain) {
    const double dist = operator_norm(t - identity);
    if (!(dist < 1.0)) {
      std::ostringstream msg;
      msg << "principal_sqrt: ||T - 1|| = " << dist << " is not < 1";
      throw SqrtDomainError(msg.str());
    }
  }

  const double t_norm = operator_norm(t);
  const double target = opts.tol * std::max(1.0, t_norm);

  RealMatrix y = t;
  RealMatrix z = identity;
  double best_residual = std::numeric_limits<double>::infinity();
  RealMatrix best = y;
  int stalled = 0;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Eigen::PartialPivLU<RealMatrix> lu_y(y);
    Eigen::PartialPivLU<RealMatrix> lu_z(z);
    const double det_prod = std::abs(lu_y.determinant() * lu_z.determinant());
    double mu = 1.0;
    if (std::isfinite(det_prod) && det_prod > 0.0)
      mu = std::pow(det_prod, -1.0 / (2.0 * n));

    const RealMatrix y_next = 0.5 * (mu * y + lu_z.inverse() / mu);
    const RealMatrix z_next = 0.5 * (mu * z + lu_y.inverse() / mu);
    y = y_next;
    z = z_next;
    if (!y.allFinite() || !z.allFinite()) break;

    const double residual = operator_norm(y * y - t);
    if (residual < best_residual) {
      best_residual = residual;
      best = y;
      stalled = 0;
    } else if (++stalled >= 3) {
      break; // quadratic convergence has bottomed out
    }
    if (residual <= target) return y;
  }
  if (best_residual <= target) return best;

  // Coupled iteration did not certify the tolerance: dense fallback.
  const RealMatrix q = detail::eigen_sqrt(t);
  const double residual = operator_norm(q * q - t);
  if (residual <= std::max(target, 1e-10 * std::max(1.0, t_norm))) return q;
  std::ostringstream msg;
  msg << "principal_sqrt: residual " << std::min(residual, best_residual)
      << " did not reach tolerance " << target;
  throw NumericError(msg.str());
}

// ---------------------------------------------------------------------------
// Symplectic regularization
// ---------------------------------------------------------------------------

//! Project a near-symplectic estimate back onto the symplectic group.
//!
//! With T = -Omega S_hat^T Omega S_hat (which equals the identity exactly
//! when S_hat is symplectic), the corrected matrix is S_hat sqrt(T)^{-1};
//! T inherits the structure T^T = Omega T Omega^{-1}, the principal root
//! preserves it, and dividing it out on the right restores the group
//! condition S^T Omega S = Omega identically.
//! The computable admission gate is ||T - 1|| < 1/2; beyond it the estimate
//! is too far from the group for the correction to be trustworthy and a
//! RegularizationDomainError is thrown.  If the true S satisfies
//! ||S_hat - S|| <= eps and ||S|| <= z with (2z+1) eps < 1/2, the result is
//! within 9 z^2 eps of S in operator norm.
inline SymplecticMatrix regularize(const RealMatrix& s_hat, double tol = kSymplecticTol) {
  const int n = static_cast<int>(s_hat.rows());
  if (s_hat.cols() != n || n % 2 != 0 || n == 0)
    throw InvalidArgument("regularize: matrix must be square with even size");
  if (!s_hat.allFinite())
    throw InvalidArgument("regularize: matrix has non-finite entries");
  const int m = n / 2;
  const RealMatrix w = omega(m);
  const RealMatrix t = -w * s_hat.transpose() * w * s_hat;

  const double gate = operator_norm(t - RealMatrix::Identity(n, n));
  if (!(gate < 0.5)) {
    std::ostringstream msg;
    msg << "regularize: ||T - 1|| = " << gate << " is not < 1/2; the estimate is too far "
        << "from the symplectic group";
    throw RegularizationDomainError(msg.str());
  }

  SqrtOptions opts;
  opts.enforce_domain = false; // the 1/2 gate above is stricter than the root's domain
  const RealMatrix q = principal_sqrt(t, opts);
  // Right division: solve X Q = S_hat via the transposed system.
  const RealMatrix regularized =
      Eigen::PartialPivLU<RealMatrix>(q.transpose()).solve(s_hat.transpose()).transpose();
  const double residual = symplectic_residual(regularized);
  if (!(residual <= tol)) {
    std::ostringstream msg;
    msg << "regularize: corrected matrix has symplectic residual " << residual
        << " above tolerance " << tol;
    throw NumericError(msg.str());
  }
  return SymplecticMatrix(regularized, tol);
}

} // namespace symplearn

#endif // SYMPLEARN_SYMPLECTIC_HPP
