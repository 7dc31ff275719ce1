//! @file errors.hpp
//! @brief Exception hierarchy used across the symplearn library.
//!
//! Every failure mode that callers may want to handle separately gets its own
//! type.  All of them derive from symplearn::Error (itself a
//! std::runtime_error), so "catch everything from this library" stays easy.

#ifndef SYMPLEARN_ERRORS_HPP
#define SYMPLEARN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace symplearn {

//! Base class for all symplearn exceptions.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

//! Invalid argument: wrong dimensions, out-of-range parameters, etc.
class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

//! A matrix fails a structural requirement (not symplectic, not a valid
//! covariance matrix, ...).
class StructureError : public Error {
public:
  explicit StructureError(const std::string& msg) : Error(msg) {}
};

//! The principal square root is not defined / not computable for the input
//! (eigenvalue on the closed negative real axis, iteration divergence).
class SqrtDomainError : public Error {
public:
  explicit SqrtDomainError(const std::string& msg) : Error(msg) {}
};

//! Symplectic regularization refused the input: the computable gate
//! ||T - 1|| < 1/2 failed, i.e. the estimate is too far from the group.
class RegularizationDomainError : public Error {
public:
  explicit RegularizationDomainError(const std::string& msg) : Error(msg) {}
};

//! The Euler (orthogonal-diagonal-orthogonal) factorization did not meet its
//! reconstruction/orthogonality contract.
class DecompositionError : public Error {
public:
  explicit DecompositionError(const std::string& msg) : Error(msg) {}
};

//! A query's probe exceeds the oracle's input photon budget.
class EnergyConstraintError : public Error {
public:
  explicit EnergyConstraintError(const std::string& msg) : Error(msg) {}
};

//! Query planning failed (parameters outside the supported regime).
class PlanningError : public Error {
public:
  explicit PlanningError(const std::string& msg) : Error(msg) {}
};

//! Malformed configuration (unknown keys, wrong schema, bad values).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

//! Numeric failure at runtime (non-finite values, failed factorization).
class NumericError : public Error {
public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace symplearn

#endif // SYMPLEARN_ERRORS_HPP
