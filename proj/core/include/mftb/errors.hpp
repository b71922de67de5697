#pragma once

#include <stdexcept>
#include <string>

namespace mftb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- vector / matrix geometry ---

class ZeroNorm : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class NearOpposition : public Error {
public:
  using Error::Error;
};

class MarginViolation : public Error {
public:
  using Error::Error;
};

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class NotNormalized : public Error {
public:
  using Error::Error;
};

// --- losses ---

class EmptyClass : public Error {
public:
  using Error::Error;
};

class LabelOutOfRange : public Error {
public:
  using Error::Error;
};

// --- subspace fitting ---

class RankTooLarge : public Error {
public:
  using Error::Error;
};

class DegenerateCloud : public Error {
public:
  using Error::Error;
};

class NonOrthonormalBasis : public Error {
public:
  using Error::Error;
};

// --- bound evaluation ---

/// The closed-form complexity bound is only meaningful while the argument of
/// its logarithm exceeds 1; outside that regime we refuse to evaluate rather
/// than clamp.
class DegenerateRegime : public Error {
public:
  using Error::Error;
};

class LConOutOfRange : public Error {
public:
  using Error::Error;
};

// --- synthetic tasks / training ---

class RankConflict : public Error {
public:
  using Error::Error;
};

class NonFinite : public Error {
public:
  using Error::Error;
};

// --- file formats ---

class BadMagic : public Error {
public:
  using Error::Error;
};

class BadVersion : public Error {
public:
  using Error::Error;
};

class MalformedHeader : public Error {
public:
  using Error::Error;
};

class TruncatedPayload : public Error {
public:
  using Error::Error;
};

class IoFailure : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// Parameter validation failures (non-positive temperature, bad ranges, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

}  // namespace mftb
