#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "hconv/common.hpp"

namespace hconv {

/// One monomial coeff * prod_i x_i^exponents[i].
template <typename Scalar>
struct MonomialT {
  Scalar coeff;
  std::vector<int> exponents;

  int degree() const {
    int d = 0;
    for (int e : exponents) d += e;
    return d;
  }
  bool operator==(const MonomialT& o) const {
    return coeff == o.coeff && exponents == o.exponents;
  }
};

/// A real polynomial in n variables, kept as the list of its terms in the
/// order they were given (no canonicalisation, so files round-trip).
template <typename Scalar>
class PolynomialT {
 public:
  using Monomial = MonomialT<Scalar>;

  PolynomialT() = default;
  PolynomialT(int num_vars, std::vector<Monomial> terms)
      : num_vars_(num_vars), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (static_cast<int>(t.exponents.size()) != num_vars_) {
        throw DimensionMismatch("polynomial term has wrong exponent count");
      }
      for (int e : t.exponents) {
        if (e < 0) throw SemanticError("polynomial exponent is negative");
      }
    }
  }

  static PolynomialT Zero(int num_vars) { return PolynomialT(num_vars, {}); }
  static PolynomialT Constant(int num_vars, Scalar c) {
    return PolynomialT(num_vars, {{c, std::vector<int>(num_vars, 0)}});
  }

  int num_vars() const { return num_vars_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  int degree() const {
    int d = 0;
    for (const auto& t : terms_) {
      if (t.coeff != Scalar(0)) d = std::max(d, t.degree());
    }
    return d;
  }

  /// Evaluation from a precomputed table powers(i, k) = x_i^k.
  Scalar Evaluate(const MatrixX<Scalar>& powers) const {
    Scalar acc(0);
    for (const auto& t : terms_) {
      Scalar m = t.coeff;
      for (int i = 0; i < num_vars_; ++i) {
        if (t.exponents[i] != 0) m *= powers(i, t.exponents[i]);
      }
      acc += m;
    }
    return acc;
  }

  PolynomialT Derivative(int var) const {
    std::vector<Monomial> out;
    for (const auto& t : terms_) {
      const int e = t.exponents[var];
      if (e == 0 || t.coeff == Scalar(0)) continue;
      Monomial d{t.coeff * Scalar(e), t.exponents};
      d.exponents[var] = e - 1;
      out.push_back(std::move(d));
    }
    return PolynomialT(num_vars_, std::move(out));
  }

  /// Upper bound of |p(x0 + u)| over the box |u_i| <= half_width from the
  /// absolute values of the shifted coefficients.
  Scalar AbsBoundOnBox(const VectorX<Scalar>& x0, Scalar half_width) const;

  bool operator==(const PolynomialT& o) const {
    return num_vars_ == o.num_vars_ && terms_ == o.terms_;
  }

 private:
  int num_vars_ = 0;
  std::vector<Monomial> terms_;
};

/// Exact polynomial map R^n -> R^m with symbolic first and second
/// derivatives. Stands in for a generic C^{1,1} map: every polynomial is
/// C^{1,1} on bounded sets, and degree <= 2 maps have a constant second
/// derivative.
template <typename Scalar>
class PolyMapT {
 public:
  using Polynomial = PolynomialT<Scalar>;
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  PolyMapT() = default;
  PolyMapT(int n_in, std::vector<Polynomial> components)
      : n_in_(n_in), components_(std::move(components)) {
    if (n_in_ < 1) throw SemanticError("map needs at least one input");
    if (components_.empty()) throw SemanticError("map needs an output");
    for (const auto& c : components_) {
      if (c.num_vars() != n_in_) {
        throw DimensionMismatch("map component has wrong variable count");
      }
    }
    BuildDerivatives();
  }

  /// x -> A x + b.
  static PolyMapT Affine(const Matrix& a, const Vector& b) {
    const int n = static_cast<int>(a.cols());
    std::vector<Polynomial> comps;
    for (int i = 0; i < a.rows(); ++i) {
      std::vector<MonomialT<Scalar>> terms;
      for (int j = 0; j < n; ++j) {
        std::vector<int> e(n, 0);
        e[j] = 1;
        terms.push_back({a(i, j), e});
      }
      terms.push_back({b[i], std::vector<int>(n, 0)});
      comps.emplace_back(n, std::move(terms));
    }
    return PolyMapT(n, std::move(comps));
  }

  static PolyMapT Identity(int n) {
    return Affine(Matrix::Identity(n, n), Vector::Zero(n));
  }

  int n_in() const { return n_in_; }
  int n_out() const { return static_cast<int>(components_.size()); }
  const std::vector<Polynomial>& components() const { return components_; }
  int degree() const { return degree_; }

  Vector Evaluate(const Vector& x) const {
    CheckInput(x);
    const Matrix powers = Powers(x);
    Vector y(n_out());
    for (int i = 0; i < n_out(); ++i) y[i] = components_[i].Evaluate(powers);
    return y;
  }

  Matrix Jacobian(const Vector& x) const {
    CheckInput(x);
    const Matrix powers = Powers(x);
    Matrix jac(n_out(), n_in_);
    for (int i = 0; i < n_out(); ++i) {
      for (int j = 0; j < n_in_; ++j) {
        jac(i, j) = first_[i][j].Evaluate(powers);
      }
    }
    return jac;
  }

  /// Hessian of component i at x.
  Matrix Hessian(int i, const Vector& x) const {
    CheckInput(x);
    const Matrix powers = Powers(x);
    Matrix h(n_in_, n_in_);
    for (int j = 0; j < n_in_; ++j) {
      for (int l = 0; l < n_in_; ++l) {
        h(j, l) = second_[i][j][l].Evaluate(powers);
      }
    }
    return h;
  }

  /// Second derivative applied to (h, k): component i is h^T H_i(x) k.
  Vector SecondDerivative(const Vector& x, const Vector& h,
                          const Vector& k) const {
    Vector out(n_out());
    for (int i = 0; i < n_out(); ++i) out[i] = h.dot(Hessian(i, x) * k);
    return out;
  }

  /// The map u -> f(x0 + u), expanded back into monomials of u.
  PolyMapT Shifted(const Vector& x0) const;

  /// The map x -> f(x) + c.
  PolyMapT PlusConstant(const Vector& c) const {
    if (c.size() != n_out()) {
      throw DimensionMismatch("constant shift has wrong dimension");
    }
    std::vector<Polynomial> comps;
    for (int i = 0; i < n_out(); ++i) {
      auto terms = components_[i].terms();
      terms.push_back({c[i], std::vector<int>(n_in_, 0)});
      comps.emplace_back(n_in_, std::move(terms));
    }
    return PolyMapT(n_in_, std::move(comps));
  }

  /// Outputs of `top` followed by the outputs of `bottom`.
  static PolyMapT Stack(const PolyMapT& top, const PolyMapT& bottom) {
    if (top.n_in() != bottom.n_in()) {
      throw DimensionMismatch("stacked maps have different inputs");
    }
    auto comps = top.components_;
    comps.insert(comps.end(), bottom.components_.begin(),
                 bottom.components_.end());
    return PolyMapT(top.n_in(), std::move(comps));
  }

  /// Upper bound of the Frobenius norm of Df over the box
  /// |x - center|_inf <= half_width; a Lipschitz constant of f there in the
  /// Euclidean norms.
  Scalar JacobianBoundOnBox(const Vector& center, Scalar half_width) const {
    Scalar acc(0);
    for (int i = 0; i < n_out(); ++i) {
      for (int j = 0; j < n_in_; ++j) {
        const Scalar b = first_[i][j].AbsBoundOnBox(center, half_width);
        acc += b * b;
      }
    }
    return std::sqrt(acc);
  }

  bool operator==(const PolyMapT& o) const {
    return n_in_ == o.n_in_ && components_ == o.components_;
  }

 private:
  void CheckInput(const Vector& x) const {
    if (x.size() != n_in_) {
      throw DimensionMismatch("map input has wrong dimension");
    }
  }

  Matrix Powers(const Vector& x) const {
    Matrix powers(n_in_, std::max(degree_, 1) + 1);
    for (int i = 0; i < n_in_; ++i) {
      powers(i, 0) = Scalar(1);
      for (int k = 1; k < powers.cols(); ++k) {
        powers(i, k) = powers(i, k - 1) * x[i];
      }
    }
    return powers;
  }

  void BuildDerivatives() {
    degree_ = 0;
    for (const auto& c : components_) degree_ = std::max(degree_, c.degree());
    // Exponents of zero-coefficient terms still index the power table.
    for (const auto& c : components_) {
      for (const auto& t : c.terms()) {
        for (int e : t.exponents) degree_ = std::max(degree_, e);
      }
    }
    first_.assign(n_out(), {});
    second_.assign(n_out(), {});
    for (int i = 0; i < n_out(); ++i) {
      for (int j = 0; j < n_in_; ++j) {
        first_[i].push_back(components_[i].Derivative(j));
      }
      second_[i].resize(n_in_);
      for (int j = 0; j < n_in_; ++j) {
        for (int l = 0; l < n_in_; ++l) {
          second_[i][j].push_back(first_[i][j].Derivative(l));
        }
      }
    }
  }

  int n_in_ = 0;
  int degree_ = 0;
  std::vector<Polynomial> components_;
  std::vector<std::vector<Polynomial>> first_;
  std::vector<std::vector<std::vector<Polynomial>>> second_;
};

namespace internal {

inline double Binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Expands coeff * prod (x0_i + u_i)^e_i into monomials of u.
template <typename Scalar>
void ExpandShiftedMonomial(const MonomialT<Scalar>& t,
                           const VectorX<Scalar>& x0,
                           std::vector<MonomialT<Scalar>>* out) {
  const int n = static_cast<int>(t.exponents.size());
  std::vector<int> k(n, 0);
  while (true) {
    Scalar c = t.coeff;
    for (int i = 0; i < n; ++i) {
      const int e = t.exponents[i];
      c *= Scalar(Binomial(e, k[i])) * std::pow(x0[i], e - k[i]);
    }
    if (c != Scalar(0)) out->push_back({c, k});
    int i = 0;
    while (i < n && k[i] == t.exponents[i]) k[i++] = 0;
    if (i == n) break;
    ++k[i];
  }
}

}  // namespace internal

template <typename Scalar>
Scalar PolynomialT<Scalar>::AbsBoundOnBox(const VectorX<Scalar>& x0,
                                          Scalar half_width) const {
  std::vector<Monomial> shifted;
  for (const auto& t : terms_) internal::ExpandShiftedMonomial(t, x0, &shifted);
  Scalar acc(0);
  for (const auto& t : shifted) {
    acc += std::abs(t.coeff) * std::pow(half_width, t.degree());
  }
  return acc;
}

template <typename Scalar>
PolyMapT<Scalar> PolyMapT<Scalar>::Shifted(const Vector& x0) const {
  CheckInput(x0);
  std::vector<Polynomial> comps;
  for (const auto& c : components_) {
    std::vector<MonomialT<Scalar>> terms;
    for (const auto& t : c.terms()) {
      internal::ExpandShiftedMonomial(t, x0, &terms);
    }
    comps.emplace_back(n_in_, std::move(terms));
  }
  return PolyMapT(n_in_, std::move(comps));
}

using Monomial = MonomialT<double>;
using Polynomial = PolynomialT<double>;
using PolyMap = PolyMapT<double>;

}  // namespace hconv
