#include "anisotens/sym_tensor.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace anisotens::tensors {

long long multiplicity(const Multiset& m) {
  const int n = m.order();
  long long r = 1;
  // n! / (k1! k2! k3!) built as binomial(n,k1)*binomial(n-k1,k2).
  auto binom = [](int nn, int kk) {
    long long v = 1;
    for (int j = 1; j <= kk; ++j) v = v * (nn - kk + j) / j;
    return v;
  };
  r = binom(n, m.k1) * binom(n - m.k1, m.k2);
  return r;
}

TensorD to_double(const TensorQ& t) {
  TensorD out(t.order());
  for (int i = 0; i < t.size(); ++i) out[i] = t[i].to_double();
  return out;
}

namespace {

long long binom_ll(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long v = 1;
  for (int j = 1; j <= k; ++j) v = v * (n - k + j) / j;
  return v;
}

}  // namespace

template <class T>
SymTensor<T> sym_product(const SymTensor<T>& a, const SymTensor<T>& b) {
  const int na = a.order(), nb = b.order(), n = na + nb;
  SymTensor<T> out(n);
  const T inv_choose = T(1) / T(binom_ll(n, na));
  for (int i = 0; i < out.size(); ++i) {
    const Multiset nu = multiset_at(n, i);
    T acc(0);
    for (int k1 = 0; k1 <= std::min(na, nu.k1); ++k1) {
      for (int k2 = 0; k2 <= std::min(na - k1, nu.k2); ++k2) {
        const int k3 = na - k1 - k2;
        if (k3 > nu.k3) continue;
        const T weight = T(binom_ll(nu.k1, k1) * binom_ll(nu.k2, k2) * binom_ll(nu.k3, k3));
        acc += weight * a.at(k1, k2, k3) * b.at(nu.k1 - k1, nu.k2 - k2, nu.k3 - k3);
      }
    }
    out[i] = inv_choose * acc;
  }
  return out;
}

template SymTensor<double> sym_product(const SymTensor<double>&, const SymTensor<double>&);
template SymTensor<Rational> sym_product(const SymTensor<Rational>&, const SymTensor<Rational>&);

template <class T>
const SymTensor<T>& identity_power(int l) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<SymTensor<T>>> cache;
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(l);
    if (it != cache.end()) return *it->second;
  }
  // Recursion happens outside the lock.
  SymTensor<T> value = (l == 0) ? [] {
    SymTensor<T> one(0);
    one[0] = T(1);
    return one;
  }()
                                : sym_product(identity_power<T>(l - 1), identity_tensor<T>());
  std::scoped_lock lock(mu);
  auto [pos, _] = cache.emplace(l, std::make_unique<SymTensor<T>>(std::move(value)));
  return *pos->second;
}

template const SymTensor<double>& identity_power(int);
template const SymTensor<Rational>& identity_power(int);

template <class T>
SymTensor<T> monomial(int k1, int k2, int k3) {
  if (k1 < 0 || k2 < 0 || k3 < 0) throw std::domain_error("monomial: negative exponent");
  const int n = k1 + k2 + k3;
  SymTensor<T> out(n);
  out.at(k1, k2, k3) = T(1) / T(multiplicity({k1, k2, k3}));
  return out;
}

template SymTensor<double> monomial(int, int, int);
template SymTensor<Rational> monomial(int, int, int);

TensorD monomial_in_frame(int k1, int k2, int k3, const so3::Rotation& frame) {
  return rotate(frame, monomial<double>(k1, k2, k3));
}

TensorD sym_outer(std::span<const so3::Vec3> vectors) {
  if (vectors.empty()) throw std::domain_error("sym_outer: needs at least one vector");
  TensorD acc(1);
  for (int i = 0; i < 3; ++i) acc[multiset_index(1, {i == 0, i == 1, i == 2})] = vectors[0][i];
  for (std::size_t v = 1; v < vectors.size(); ++v) {
    TensorD next(1);
    for (int i = 0; i < 3; ++i) next[multiset_index(1, {i == 0, i == 1, i == 2})] = vectors[v][i];
    acc = sym_product(acc, next);
  }
  return acc;
}

namespace {

long long ipow3(int n) {
  long long v = 1;
  for (int i = 0; i < n; ++i) v *= 3;
  return v;
}

}  // namespace

template <class T>
std::vector<T> to_full_array(const SymTensor<T>& u) {
  const int n = u.order();
  const long long total = ipow3(n);
  std::vector<T> full(static_cast<std::size_t>(total), T(0));
  for (long long idx = 0; idx < total; ++idx) {
    long long rem = idx;
    Multiset m{0, 0, 0};
    for (int a = 0; a < n; ++a) {
      const int digit = static_cast<int>(rem % 3);
      rem /= 3;
      if (digit == 0) ++m.k1;
      else if (digit == 1) ++m.k2;
      else ++m.k3;
    }
    full[static_cast<std::size_t>(idx)] = u[multiset_index(n, m)];
  }
  return full;
}

template std::vector<double> to_full_array(const SymTensor<double>&);
template std::vector<Rational> to_full_array(const SymTensor<Rational>&);

template <class T>
SymTensor<T> from_full_array(int order, const std::vector<T>& full) {
  if (static_cast<long long>(full.size()) != ipow3(order))
    throw std::invalid_argument("from_full_array: size mismatch");
  SymTensor<T> out(order);
  for (int i = 0; i < out.size(); ++i) {
    const Multiset m = multiset_at(order, i);
    // Representative index: k1 zeros, then k2 ones, then k3 twos.
    long long idx = 0, stride = 1;
    for (int a = 0; a < m.k1; ++a) stride *= 3;
    for (int a = 0; a < m.k2; ++a) {
      idx += stride;
      stride *= 3;
    }
    for (int a = 0; a < m.k3; ++a) {
      idx += 2 * stride;
      stride *= 3;
    }
    out[i] = full[static_cast<std::size_t>(idx)];
  }
  return out;
}

template SymTensor<double> from_full_array(int, const std::vector<double>&);
template SymTensor<Rational> from_full_array(int, const std::vector<Rational>&);

template <class T>
SymTensor<T> rotate_by_matrix(const std::array<std::array<T, 3>, 3>& m, const SymTensor<T>& u) {
  const int n = u.order();
  if (n == 0) return u;
  std::vector<T> full = to_full_array(u);
  const long long total = static_cast<long long>(full.size());
  std::vector<T> next(full.size(), T(0));
  // Apply the matrix to one index slot at a time: new_j = sum_i m[j][i] old_i.
  long long stride = 1;
  for (int axis = 0; axis < n; ++axis) {
    for (long long base = 0; base < total; ++base) {
      if ((base / stride) % 3 != 0) continue;
      const T v0 = full[base], v1 = full[base + stride], v2 = full[base + 2 * stride];
      for (int j = 0; j < 3; ++j)
        next[base + j * stride] = m[j][0] * v0 + m[j][1] * v1 + m[j][2] * v2;
    }
    std::swap(full, next);
    stride *= 3;
  }
  return from_full_array(n, full);
}

template SymTensor<double> rotate_by_matrix(const std::array<std::array<double, 3>, 3>&,
                                            const SymTensor<double>&);
template SymTensor<Rational> rotate_by_matrix(const std::array<std::array<Rational, 3>, 3>&,
                                              const SymTensor<Rational>&);

TensorD rotate(const so3::Rotation& r, const TensorD& u) {
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = r(i, j);
  return rotate_by_matrix(m, u);
}

}  // namespace anisotens::tensors
