#pragma once

#include <stdexcept>
#include <string>

namespace pnpmri {

/// Root of the library's exception hierarchy. Each subclass maps onto one
/// CLI exit code (see tools/pnpmri.cpp).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes of two operands disagree, or a grid is too small for an operation.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A scalar parameter is out of its admissible range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// A mask specification cannot be realised (e.g. calibration band larger
/// than the line budget).
class InfeasibleSpecError : public Error {
public:
  using Error::Error;
};

/// SNR or rSNR requested against an all-zero signal.
class UndefinedMetricError : public Error {
public:
  using Error::Error;
};

/// Mask with no sampled entries.
class EmptyMaskError : public Error {
public:
  using Error::Error;
};

/// Non-finite values appeared during an iterative solve.
class DivergenceError : public Error {
public:
  using Error::Error;
};

/// A dense factorisation failed.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Malformed or truncated binary file, or unreadable path.
class FormatError : public Error {
public:
  using Error::Error;
};

/// A weight file declares a spectral norm its kernel does not honour.
class CertificationError : public Error {
public:
  using Error::Error;
};

/// Denoiser could not be applied to the given image.
class DenoiserError : public Error {
public:
  using Error::Error;
};

} // namespace pnpmri
