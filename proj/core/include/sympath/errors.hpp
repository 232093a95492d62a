#pragma once

#include <stdexcept>
#include <string>

namespace sympath {

/// Base class for all library errors. `code()` is stable across releases and
/// is what the CLI maps to machine-readable error objects.
class Error : public std::runtime_error {
 public:
  Error(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(10, w) {}
};

struct InvariantError : Error {
  explicit InvariantError(const std::string& w) : Error(11, w) {}
};

/// A singular value sits inside the tolerance band of the rank threshold;
/// the caller must refine tol.
struct IndeterminateRankError : Error {
  explicit IndeterminateRankError(const std::string& w) : Error(12, w) {}
};

struct NoCrossingError : Error {
  explicit NoCrossingError(const std::string& w) : Error(13, w) {}
};

struct ResolutionError : Error {
  explicit ResolutionError(const std::string& w) : Error(14, w) {}
};

/// A crossing form is singular but not identically zero. The caller should
/// switch to the spectral-flow route.
struct DegenerateCrossingError : Error {
  explicit DegenerateCrossingError(const std::string& w) : Error(15, w) {}
};

struct BorderlineEigenvalueError : Error {
  BorderlineEigenvalueError(const std::string& w, double lambda)
      : Error(16, w), eigenvalue(lambda) {}
  double eigenvalue;
};

struct LabelAmbiguityError : Error {
  explicit LabelAmbiguityError(const std::string& w) : Error(17, w) {}
};

struct FormError : Error {
  explicit FormError(const std::string& w) : Error(18, w) {}
};

struct AssemblyError : Error {
  explicit AssemblyError(const std::string& w) : Error(19, w) {}
};

struct HypothesisError : Error {
  explicit HypothesisError(const std::string& w) : Error(20, w) {}
};

struct PairingError : Error {
  explicit PairingError(const std::string& w) : Error(21, w) {}
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& w) : Error(22, w) {}
};

struct StepControlError : Error {
  explicit StepControlError(const std::string& w) : Error(23, w) {}
};

struct GradingError : Error {
  explicit GradingError(const std::string& w) : Error(24, w) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(25, w) {}
};

}  // namespace sympath
