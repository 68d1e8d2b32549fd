#include "hconv/cone.hpp"

#include <algorithm>

namespace hconv {

ConeSpec::ConeSpec(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  for (const Block& b : blocks_) {
    if (b.size < 1) throw SemanticError("cone block size must be positive");
    for (int i = 0; i < b.size; ++i) kinds_.push_back(b.kind);
  }
}

ConeSpec ConeSpec::Product(const ConeSpec& a, const ConeSpec& b) {
  std::vector<Block> blocks = a.blocks_;
  blocks.insert(blocks.end(), b.blocks_.begin(), b.blocks_.end());
  return ConeSpec(std::move(blocks));
}

bool ConeSpec::Contains(const VectorXd& y, double tol) const {
  if (y.size() != dim()) throw DimensionMismatch("cone: vector dimension");
  for (int i = 0; i < dim(); ++i) {
    if (kinds_[i] == Kind::kNonpositive ? y[i] > tol : std::abs(y[i]) > tol) {
      return false;
    }
  }
  return true;
}

VectorXd ConeSpec::Project(const VectorXd& y) const {
  if (y.size() != dim()) throw DimensionMismatch("cone: vector dimension");
  VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) {
    out[i] = kinds_[i] == Kind::kNonpositive ? std::min(y[i], 0.0) : 0.0;
  }
  return out;
}

bool ConeSpec::DualContains(const VectorXd& lambda, double tol) const {
  if (lambda.size() != dim()) throw DimensionMismatch("cone: vector dimension");
  for (int i = 0; i < dim(); ++i) {
    if (kinds_[i] == Kind::kNonpositive && lambda[i] < -tol) return false;
  }
  return true;
}

VectorXd ConeSpec::ProjectDual(const VectorXd& lambda) const {
  VectorXd out = lambda;
  for (int i = 0; i < dim(); ++i) {
    if (kinds_[i] == Kind::kNonpositive) out[i] = std::max(out[i], 0.0);
  }
  return out;
}

std::vector<VectorXd> ConeSpec::Generators() const {
  std::vector<VectorXd> out;
  for (int i = 0; i < dim(); ++i) {
    if (kinds_[i] == Kind::kNonpositive) out.push_back(-VectorXd::Unit(dim(), i));
  }
  return out;
}

std::vector<VectorXd> ConeSpec::DualGenerators() const {
  std::vector<VectorXd> out;
  for (int i = 0; i < dim(); ++i) {
    out.push_back(VectorXd::Unit(dim(), i));
    if (kinds_[i] == Kind::kZero) out.push_back(-VectorXd::Unit(dim(), i));
  }
  return out;
}

std::vector<VectorXd> ConeSpec::DualGeneratorsOrthogonalTo(const VectorXd& y,
                                                           double tol) const {
  if (y.size() != dim()) throw DimensionMismatch("cone: vector dimension");
  std::vector<VectorXd> out;
  for (int i = 0; i < dim(); ++i) {
    if (kinds_[i] == Kind::kZero) {
      out.push_back(VectorXd::Unit(dim(), i));
      out.push_back(-VectorXd::Unit(dim(), i));
    } else if (std::abs(y[i]) <= tol) {
      out.push_back(VectorXd::Unit(dim(), i));
    }
  }
  return out;
}

std::string ConeSpec::ToString() const {
  std::string s;
  for (const Block& b : blocks_) {
    if (!s.empty()) s += " x ";
    s += b.kind == Kind::kNonpositive ? "nonpositive(" : "zero(";
    s += std::to_string(b.size) + ")";
  }
  return s;
}

CheckResult CheckNormalCone(const VectorXd& lambda, const VectorXd& y,
                            const ConeSpec& cone, double tol) {
  if (lambda.size() != cone.dim()) {
    throw DimensionMismatch("normal cone: multiplier dimension");
  }
  if (!cone.Contains(y, tol)) {
    throw PointNotInCone("normal cone: y is not in C");
  }
  CheckResult result;
  const double base = lambda.dot(y);
  auto test = [&](const VectorXd& c) {
    ++result.samples;
    const double slack = base - lambda.dot(c);
    result.worst_slack = std::min(result.worst_slack, slack);
    if (slack < -tol && result.passed) {
      result.passed = false;
      result.witness = c;
      result.detail = "<lambda, c - y> > 0 for this c in C";
    }
  };
  test(VectorXd::Zero(cone.dim()));
  test(2.0 * y);
  // Along a recession direction the slack is affine in t, so t = 1 decides
  // the sign for every t > 0.
  for (const VectorXd& g : cone.Generators()) test(y + g);
  return result;
}

}  // namespace hconv
