#pragma once

#include <compare>
#include <map>
#include <stdexcept>

#include "anisotens/rational.hpp"
#include "anisotens/sym_tensor.hpp"

namespace anisotens::tensors {

/// Formal monomial e1^k1 e2^k2 e3^k3 i^l in the commutative algebra of
/// symmetrized products; tensor order k1+k2+k3+2l.
struct PolyTerm {
  int k1 = 0, k2 = 0, k3 = 0, l = 0;
  int order() const { return k1 + k2 + k3 + 2 * l; }
  auto operator<=>(const PolyTerm&) const = default;
};

/// Homogeneous polynomial in (e1, e2, e3, i) with rational coefficients.
/// The algebra is commutative because all products are symmetrized.
class MPoly {
 public:
  MPoly() = default;

  static MPoly zero() { return {}; }
  static MPoly constant(const Rational& c) { return term({0, 0, 0, 0}, c); }
  static MPoly e1() { return term({1, 0, 0, 0}, 1); }
  static MPoly e2() { return term({0, 1, 0, 0}, 1); }
  static MPoly e3() { return term({0, 0, 1, 0}, 1); }
  static MPoly ident() { return term({0, 0, 0, 1}, 1); }
  static MPoly term(const PolyTerm& t, const Rational& c);

  const std::map<PolyTerm, Rational>& terms() const { return t_; }
  bool empty() const { return t_.empty(); }

  /// Common tensor order of the terms; throws when mixed.
  int order() const;

  MPoly& operator+=(const MPoly& o);
  MPoly& operator-=(const MPoly& o);
  friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
  friend MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
  friend MPoly operator*(const MPoly& a, const MPoly& b);
  friend MPoly operator*(const Rational& s, MPoly p);
  MPoly pow(int e) const;

  /// Materialize as a symmetric tensor (all terms must share one order).
  TensorQ tensor() const;

 private:
  std::map<PolyTerm, Rational> t_;
};

/// Chebyshev tensor polynomials: T~_n(y,z) = z^{n/2} T_n(y/sqrt z) and
/// U~_n(y,z) = z^{n/2} U_n(y/sqrt z), expanded so only integer powers of
/// y and z appear. T~_0 = 1, U~_{-1} = 0.
MPoly chebyshev_t(int n, const MPoly& y, const MPoly& z);
MPoly chebyshev_u(int n, const MPoly& y, const MPoly& z);

/// Jacobi tensor polynomial P~_k^{(mu,mu)}(y,z) = z^{k/2} P_k^{(mu,mu)}(y/sqrt z)
/// with the textbook normalization.
MPoly jacobi_equal_index(int k, int mu, const MPoly& y, const MPoly& z);

/// Same polynomial rescaled to leading coefficient 1 on y^k. With
/// total_order = k + mu this matches the coefficients solved from the
/// traceless condition, and for k = total_order it is exactly (e1^k)_0.
MPoly jacobi_monic(int k, int total_order, const MPoly& y, const MPoly& z);

/// Scalar evaluations used by consistency checks.
double chebyshev_t_scalar(int n, double x);
double chebyshev_u_scalar(int n, double x);
double jacobi_scalar(int k, int a, int b, double x);

}  // namespace anisotens::tensors
