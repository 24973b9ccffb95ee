#pragma once

#include <stdexcept>
#include <string>

namespace sitdyn {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is out of its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The system has no positive steady state at the requested level.
class NoPositiveEquilibrium : public Error {
 public:
  using Error::Error;
};

class CalibrationInfeasible : public Error {
 public:
  using Error::Error;
};

/// N <= 1: the population collapses without any release.
class UnaidedCollapse : public Error {
 public:
  using Error::Error;
};

/// The envelope of the sterile population does not exceed M_i^crit.
class NoGuarantee : public Error {
 public:
  using Error::Error;
};

/// Closed-form expression evaluated outside its domain (a case split gap).
class NotApplicable : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure (root bracketing, RK step halving) did not converge.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

class MalformedFile : public Error {
 public:
  using Error::Error;
};

}  // namespace sitdyn
