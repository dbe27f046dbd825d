#pragma once

#include <stdexcept>
#include <string>

namespace qortho {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the documented range (|q|, |rho|, |beta| ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A floating-point value reached a path that requires exact rationals.
class IrrationalParameter : public Error {
 public:
  using Error::Error;
};

/// A conditioning point lies outside the support S(q).
class SupportViolation : public Error {
 public:
  using Error::Error;
};

/// Ratio of densities requested where the denominator vanishes.
class DivisionAtBoundary : public Error {
 public:
  using Error::Error;
};

/// Quadrature or truncated series did not reach the requested accuracy.
class Nonconvergence : public Error {
 public:
  using Error::Error;
};

/// Adaptive truncation of an expansion hit its cap before the tail bound fell below tolerance.
class TruncationUnreliable : public Nonconvergence {
 public:
  using Nonconvergence::Nonconvergence;
};

class UnsupportedPair : public Error {
 public:
  using Error::Error;
};

class InvalidPair : public Error {
 public:
  using Error::Error;
};

/// ratio_connection requires w_0 == 1.
class NonunitW0 : public Error {
 public:
  using Error::Error;
};

/// The band of a connection matrix exceeded the degree of the density ratio.
class BandViolation : public Error {
 public:
  using Error::Error;
};

/// A rejection sampler observed target(x) > M * proposal(x).
class EnvelopeViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace qortho
