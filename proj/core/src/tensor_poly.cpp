#include "anisotens/tensor_poly.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace anisotens::tensors {

MPoly MPoly::term(const PolyTerm& t, const Rational& c) {
  MPoly p;
  if (!c.is_zero()) p.t_[t] = c;
  return p;
}

int MPoly::order() const {
  if (t_.empty()) throw std::domain_error("MPoly::order: zero polynomial");
  const int n = t_.begin()->first.order();
  for (const auto& [k, v] : t_)
    if (k.order() != n) throw std::domain_error("MPoly::order: mixed term orders");
  return n;
}

MPoly& MPoly::operator+=(const MPoly& o) {
  for (const auto& [k, v] : o.t_) {
    auto [it, inserted] = t_.emplace(k, v);
    if (!inserted) {
      it->second += v;
      if (it->second.is_zero()) t_.erase(it);
    }
  }
  return *this;
}

MPoly& MPoly::operator-=(const MPoly& o) { return *this += Rational(-1) * o; }

MPoly operator*(const MPoly& a, const MPoly& b) {
  MPoly out;
  for (const auto& [ka, va] : a.t_)
    for (const auto& [kb, vb] : b.t_) {
      const PolyTerm k{ka.k1 + kb.k1, ka.k2 + kb.k2, ka.k3 + kb.k3, ka.l + kb.l};
      auto [it, inserted] = out.t_.emplace(k, va * vb);
      if (!inserted) {
        it->second += va * vb;
        if (it->second.is_zero()) out.t_.erase(it);
      }
    }
  return out;
}

MPoly operator*(const Rational& s, MPoly p) {
  if (s.is_zero()) return MPoly::zero();
  for (auto& [k, v] : p.t_) v *= s;
  return p;
}

MPoly MPoly::pow(int e) const {
  if (e < 0) throw std::domain_error("MPoly::pow: negative exponent");
  MPoly acc = MPoly::constant(1);
  for (int i = 0; i < e; ++i) acc = acc * (*this);
  return acc;
}

namespace {

// Cached materialization of a single e1^k1 e2^k2 e3^k3 i^l term.
const TensorQ& term_tensor(const PolyTerm& t) {
  static std::mutex mu;
  static std::map<PolyTerm, std::unique_ptr<TensorQ>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(t);
  if (it != cache.end()) return *it->second;
  TensorQ value = identity_multiply(t.l, monomial<Rational>(t.k1, t.k2, t.k3));
  auto [pos, _] = cache.emplace(t, std::make_unique<TensorQ>(std::move(value)));
  return *pos->second;
}

}  // namespace

TensorQ MPoly::tensor() const {
  const int n = order();
  TensorQ out(n);
  for (const auto& [k, v] : t_) out += v * term_tensor(k);
  return out;
}

MPoly chebyshev_t(int n, const MPoly& y, const MPoly& z) {
  if (n < 0) throw std::domain_error("chebyshev_t: negative degree");
  if (n == 0) return MPoly::constant(1);
  const MPoly s = z - y * y;
  MPoly out;
  MPoly ypow = MPoly::constant(1);
  std::vector<MPoly> ypows(n + 1);
  for (int i = 0; i <= n; ++i) {
    ypows[i] = ypow;
    ypow = ypow * y;
  }
  MPoly spow = MPoly::constant(1);
  for (int r = 0; 2 * r <= n; ++r) {
    const Rational c = (r % 2 ? Rational(-1) : Rational(1)) * Rational::binomial(n, 2 * r);
    out += c * (ypows[n - 2 * r] * spow);
    spow = spow * s;
  }
  return out;
}

MPoly chebyshev_u(int n, const MPoly& y, const MPoly& z) {
  if (n < -1) throw std::domain_error("chebyshev_u: degree below -1");
  if (n == -1) return MPoly::zero();
  const MPoly s = z - y * y;
  MPoly out;
  std::vector<MPoly> ypows(n + 1);
  MPoly ypow = MPoly::constant(1);
  for (int i = 0; i <= n; ++i) {
    ypows[i] = ypow;
    ypow = ypow * y;
  }
  MPoly spow = MPoly::constant(1);
  for (int r = 0; 2 * r <= n; ++r) {
    const Rational c = (r % 2 ? Rational(-1) : Rational(1)) * Rational::binomial(n + 1, 2 * r + 1);
    out += c * (ypows[n - 2 * r] * spow);
    spow = spow * s;
  }
  return out;
}

MPoly jacobi_equal_index(int k, int mu, const MPoly& y, const MPoly& z) {
  if (k < 0 || mu < 0) throw std::domain_error("jacobi_equal_index: bad indices");
  // Gegenbauer-form expansion; the Gamma-function prefactor is rational for
  // integer indices.
  const Rational pref = Rational::factorial(2 * mu) * Rational::factorial(k + mu) /
                        (Rational::factorial(mu) * Rational::factorial(k + 2 * mu));
  MPoly out;
  for (int j = 0; 2 * j <= k; ++j) {
    Rational c = pref * Rational::double_factorial(2 * mu + 2 * (k - j) - 1) /
                 (Rational::double_factorial(2 * mu - 1) * Rational(1LL << j) *
                  Rational::factorial(j) * Rational::factorial(k - 2 * j));
    if (j % 2) c = -c;
    out += c * (y.pow(k - 2 * j) * z.pow(j));
  }
  return out;
}

MPoly jacobi_monic(int k, int total_order, const MPoly& y, const MPoly& z) {
  const int n = total_order;
  if (k < 0 || n < k) throw std::domain_error("jacobi_monic: bad indices");
  MPoly out;
  for (int j = 0; 2 * j <= k; ++j) {
    Rational c = Rational::factorial(k) * Rational::double_factorial(2 * n - 2 * j - 1) /
                 (Rational(1LL << j) * Rational::factorial(j) * Rational::factorial(k - 2 * j) *
                  Rational::double_factorial(2 * n - 1));
    if (j % 2) c = -c;
    out += c * (y.pow(k - 2 * j) * z.pow(j));
  }
  return out;
}

double chebyshev_t_scalar(int n, double x) {
  if (n == 0) return 1.0;
  double tm = 1.0, t = x;
  for (int i = 2; i <= n; ++i) {
    double next = 2 * x * t - tm;
    tm = t;
    t = next;
  }
  return t;
}

double chebyshev_u_scalar(int n, double x) {
  if (n < 0) return 0.0;
  if (n == 0) return 1.0;
  double um = 1.0, u = 2 * x;
  for (int i = 2; i <= n; ++i) {
    double next = 2 * x * u - um;
    um = u;
    u = next;
  }
  return u;
}

double jacobi_scalar(int k, int a, int b, double x) {
  if (k == 0) return 1.0;
  double pm = 1.0;
  double p = 0.5 * (a - b) + 0.5 * (a + b + 2) * x;
  for (int m = 2; m <= k; ++m) {
    const double c1 = 2.0 * m * (m + a + b) * (2 * m + a + b - 2);
    const double c2 = (2 * m + a + b - 1) * (2 * m + a + b) * (2 * m + a + b - 2);
    const double c3 = (2 * m + a + b - 1) * (a * a - b * b);
    const double c4 = 2.0 * (m + a - 1) * (m + b - 1) * (2 * m + a + b);
    const double next = ((c2 * x + c3) * p - c4 * pm) / c1;
    pm = p;
    p = next;
  }
  return p;
}

}  // namespace anisotens::tensors
