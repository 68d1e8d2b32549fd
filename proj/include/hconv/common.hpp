#pragma once

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hconv {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can map the whole family onto one exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HCONV_DEFINE_ERROR(Name)           \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

HCONV_DEFINE_ERROR(DomainError);
HCONV_DEFINE_ERROR(UnsupportedExponent);
HCONV_DEFINE_ERROR(PreconditionViolated);
HCONV_DEFINE_ERROR(DimensionMismatch);
HCONV_DEFINE_ERROR(NotSurjective);
HCONV_DEFINE_ERROR(ConditionFails);
HCONV_DEFINE_ERROR(DimensionTooLarge);
HCONV_DEFINE_ERROR(NotRegular);
HCONV_DEFINE_ERROR(Infeasible);
HCONV_DEFINE_ERROR(EpsilonNonpositive);
HCONV_DEFINE_ERROR(MultiplierNotFound);
HCONV_DEFINE_ERROR(PointNotInCone);
HCONV_DEFINE_ERROR(SemanticError);
HCONV_DEFINE_ERROR(NotFound);

#undef HCONV_DEFINE_ERROR

/// Metric regularity could not be confirmed on any of the shrunken radii.
/// Carries the sample pair with the worst distance ratio.
class ValidationFailed : public Error {
 public:
  ValidationFailed(const std::string& what, VectorXd x, VectorXd y)
      : Error(what), x_(std::move(x)), y_(std::move(y)) {}
  const VectorXd& x() const { return x_; }
  const VectorXd& y() const { return y_; }

 private:
  VectorXd x_;
  VectorXd y_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Outcome of a sampling check: pass, or a concrete point that violates the
/// property being checked.
struct CheckResult {
  bool passed = true;
  VectorXd witness;
  // Worst value of the checked slack (negative means violated).
  double worst_slack = kInfinity;
  int samples = 0;
  std::string detail;

  explicit operator bool() const { return passed; }
};

}  // namespace hconv
