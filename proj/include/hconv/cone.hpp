#pragma once

#include <string>
#include <vector>

#include "hconv/common.hpp"

namespace hconv {

/// A polyhedral closed convex cone in R^m, built as a product of blocks
/// R^k_- (nonpositive orthant) and {0}^k, in order.
class ConeSpec {
 public:
  enum class Kind { kNonpositive, kZero };
  struct Block {
    Kind kind;
    int size;
    bool operator==(const Block& o) const {
      return kind == o.kind && size == o.size;
    }
  };

  ConeSpec() = default;
  explicit ConeSpec(std::vector<Block> blocks);

  static ConeSpec NonpositiveOrthant(int m) { return ConeSpec({{Kind::kNonpositive, m}}); }
  static ConeSpec Zero(int m) { return ConeSpec({{Kind::kZero, m}}); }
  static ConeSpec Product(const ConeSpec& a, const ConeSpec& b);

  const std::vector<Block>& blocks() const { return blocks_; }
  int dim() const { return static_cast<int>(kinds_.size()); }
  Kind kind(int i) const { return kinds_[i]; }

  bool Contains(const VectorXd& y, double tol = 0.0) const;
  /// Euclidean projection onto C (exact).
  VectorXd Project(const VectorXd& y) const;
  /// |y - P_C(y)|_2.
  double Distance(const VectorXd& y) const { return (y - Project(y)).norm(); }

  /// Membership in the negative dual cone C- = {l : <l, c> <= 0 for c in C}.
  bool DualContains(const VectorXd& lambda, double tol = 0.0) const;
  VectorXd ProjectDual(const VectorXd& lambda) const;

  /// Generators of C as a cone: -e_i on orthant coordinates. Zero blocks
  /// contribute none.
  std::vector<VectorXd> Generators() const;
  /// Conic generators of C-: e_i on orthant coordinates, +-e_i on zero
  /// coordinates.
  std::vector<VectorXd> DualGenerators() const;
  /// Conic generators of C- intersected with the annihilator of y in C:
  /// e_i for orthant coordinates with |y_i| <= tol, +-e_i on zero
  /// coordinates.
  std::vector<VectorXd> DualGeneratorsOrthogonalTo(const VectorXd& y,
                                                   double tol) const;

  std::string ToString() const;
  bool operator==(const ConeSpec& o) const { return blocks_ == o.blocks_; }

 private:
  std::vector<Block> blocks_;
  std::vector<Kind> kinds_;
};

/// lambda in N(y; C), i.e. <lambda, c - y> <= tol for every c in C. For a
/// polyhedral cone it suffices to test the apex c = 0, c = 2y and the
/// recession directions y + t g of the generators. On failure the witness is
/// the offending c. Throws PointNotInCone when y is not in C (within tol).
CheckResult CheckNormalCone(const VectorXd& lambda, const VectorXd& y,
                            const ConeSpec& cone, double tol = 1e-12);

}  // namespace hconv
