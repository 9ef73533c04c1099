#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "anisotens/rational.hpp"
#include "anisotens/so3.hpp"

namespace anisotens::tensors {

/// Index bookkeeping for symmetric order-n tensors over R^3. A component
/// class is the multiset (k1,k2,k3) with k1+k2+k3 = n: the number of
/// indices equal to 1, 2 and 3. Classes are enumerated with k1 descending,
/// then k2 descending, so index 0 is always (n,0,0).
struct Multiset {
  int k1 = 0, k2 = 0, k3 = 0;
  int order() const { return k1 + k2 + k3; }
  bool operator==(const Multiset&) const = default;
};

inline int compact_size(int order) { return (order + 1) * (order + 2) / 2; }

inline int multiset_index(int order, const Multiset& m) {
  const int t = order - m.k1;
  return t * (t + 1) / 2 + (t - m.k2);
}

inline Multiset multiset_at(int order, int index) {
  for (int k1 = order; k1 >= 0; --k1) {
    const int t = order - k1;
    const int base = t * (t + 1) / 2;
    if (index < base + t + 1) {
      const int k2 = t - (index - base);
      return {k1, k2, order - k1 - k2};
    }
  }
  throw std::out_of_range("multiset_at: bad index");
}

/// n! / (k1! k2! k3!), the number of index arrangements in the class.
long long multiplicity(const Multiset& m);

/// Symmetric tensor in compact per-class storage: one representative value
/// per index multiset; (n+1)(n+2)/2 entries instead of 3^n.
template <class T>
class SymTensor {
 public:
  SymTensor() : order_(0), c_(1, T(0)) {}
  explicit SymTensor(int order) : order_(order), c_(compact_size(order), T(0)) {
    if (order < 0) throw std::domain_error("SymTensor: negative order");
  }

  int order() const { return order_; }
  int size() const { return static_cast<int>(c_.size()); }

  const T& operator[](int flat) const { return c_[flat]; }
  T& operator[](int flat) { return c_[flat]; }
  const T& at(int k1, int k2, int k3) const {
    return c_[multiset_index(order_, {k1, k2, k3})];
  }
  T& at(int k1, int k2, int k3) { return c_[multiset_index(order_, {k1, k2, k3})]; }

  SymTensor& operator+=(const SymTensor& o) {
    check_same_order(o);
    for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  SymTensor& operator-=(const SymTensor& o) {
    check_same_order(o);
    for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  SymTensor& operator*=(const T& s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(SymTensor a, const T& s) { return a *= s; }
  friend SymTensor operator*(const T& s, SymTensor a) { return a *= s; }

  bool operator==(const SymTensor&) const = default;

 private:
  void check_same_order(const SymTensor& o) const {
    if (order_ != o.order_) throw std::invalid_argument("SymTensor: order mismatch");
  }
  int order_;
  std::vector<T> c_;
};

using TensorD = SymTensor<double>;
using TensorQ = SymTensor<Rational>;

TensorD to_double(const TensorQ& t);

/// Multiplicity-weighted component sum; equals the full 3^n contraction.
template <class T>
T dot(const SymTensor<T>& u, const SymTensor<T>& v) {
  if (u.order() != v.order()) throw std::invalid_argument("dot: order mismatch");
  T acc(0);
  for (int i = 0; i < u.size(); ++i) {
    const Multiset m = multiset_at(u.order(), i);
    acc += T(multiplicity(m)) * u[i] * v[i];
  }
  return acc;
}

template <class T>
T norm_squared(const SymTensor<T>& u) { return dot(u, u); }

/// Contraction of one index pair; order n -> n-2. Throws for n < 2.
template <class T>
SymTensor<T> trace(const SymTensor<T>& u) {
  if (u.order() < 2) throw std::domain_error("trace: tensor order must be >= 2");
  SymTensor<T> out(u.order() - 2);
  for (int i = 0; i < out.size(); ++i) {
    const Multiset m = multiset_at(out.order(), i);
    out[i] = u.at(m.k1 + 2, m.k2, m.k3) + u.at(m.k1, m.k2 + 2, m.k3) + u.at(m.k1, m.k2, m.k3 + 2);
  }
  return out;
}

/// Symmetrized product of two symmetric tensors (projection of the outer
/// product onto the symmetric part).
template <class T>
SymTensor<T> sym_product(const SymTensor<T>& a, const SymTensor<T>& b);

/// Second-order identity tensor i (delta_ij).
template <class T>
SymTensor<T> identity_tensor() {
  SymTensor<T> t(2);
  t.at(2, 0, 0) = T(1);
  t.at(0, 2, 0) = T(1);
  t.at(0, 0, 2) = T(1);
  return t;
}

/// Symmetrized i^l, cached per l.
template <class T>
const SymTensor<T>& identity_power(int l);

/// Symmetrized product i^l U.
template <class T>
SymTensor<T> identity_multiply(int l, const SymTensor<T>& u) {
  if (l < 0) throw std::domain_error("identity_multiply: l must be >= 0");
  if (l == 0) return u;
  return sym_product(identity_power<T>(l), u);
}

/// Reference-frame monomial e1^k1 e2^k2 e3^k3: a single compact entry
/// k1!k2!k3!/n! at its own multiset.
template <class T>
SymTensor<T> monomial(int k1, int k2, int k3);

/// Monomial in the axes of an arbitrary frame.
TensorD monomial_in_frame(int k1, int k2, int k3, const so3::Rotation& frame);

/// Symmetrized outer product of a vector list.
TensorD sym_outer(std::span<const so3::Vec3> vectors);

/// Rotation action: every reference axis e_i is replaced by body axis m_i
/// (column i of the matrix). Works for any 3x3 scalar matrix, which keeps
/// the signed-permutation group elements exact in rational arithmetic.
template <class T>
SymTensor<T> rotate_by_matrix(const std::array<std::array<T, 3>, 3>& m, const SymTensor<T>& u);

TensorD rotate(const so3::Rotation& r, const TensorD& u);

/// Full 3^n component array (test oracle and rotation workhorse).
template <class T>
std::vector<T> to_full_array(const SymTensor<T>& u);
template <class T>
SymTensor<T> from_full_array(int order, const std::vector<T>& full);

/// Orthogonal projection onto the traceless subspace, U - iW with
/// trace(U - iW) = 0. Identity for order <= 1; exact for rational input.
TensorQ traceless_project(const TensorQ& u);
TensorD traceless_project(const TensorD& u);

}  // namespace anisotens::tensors
