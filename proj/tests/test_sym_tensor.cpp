#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

#include "anisotens/sym_tensor.hpp"
#include "anisotens/tensor_poly.hpp"
#include "anisotens/traceless_bases.hpp"

using namespace anisotens;
using namespace anisotens::tensors;

namespace {

constexpr double kPi = std::numbers::pi;

so3::Rotation random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double a = g(rng), b = g(rng), c = g(rng), d = g(rng);
  const double n = std::sqrt(a * a + b * b + c * c + d * d);
  return so3::rotation_from_quaternion({a / n, b / n, c / n, d / n});
}

TensorD random_tensor(int order, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorD t(order);
  for (int i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

TensorQ random_rational_tensor(int order, std::mt19937& rng) {
  std::uniform_int_distribution<int> u(-6, 6);
  TensorQ t(order);
  for (int i = 0; i < t.size(); ++i) t[i] = Rational(u(rng), 1 + (i % 3));
  return t;
}

// Brute-force dot product over all 3^n index tuples.
double full_dot(const TensorD& a, const TensorD& b) {
  const auto fa = to_full_array(a);
  const auto fb = to_full_array(b);
  double s = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) s += fa[i] * fb[i];
  return s;
}

}  // namespace

TEST_CASE("sym_outer on elementary vectors") {
  const so3::Vec3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
  const std::array<so3::Vec3, 1> one{e1};
  const TensorD t1 = sym_outer(one);
  CHECK(t1.at(1, 0, 0) == 1.0);
  CHECK(t1.at(0, 1, 0) == 0.0);

  const TensorD t12 = sym_outer(std::array{e1, e2});
  CHECK(t12.at(1, 1, 0) == doctest::Approx(0.5));
  CHECK(t12.at(2, 0, 0) == 0.0);
  CHECK(t12.at(0, 1, 1) == 0.0);

  const TensorD t123 = sym_outer(std::array{e1, e2, e3});
  CHECK(t123.at(1, 1, 1) == doctest::Approx(1.0 / 6.0));
  for (int i = 0; i < t123.size(); ++i) {
    const auto m = multiset_at(3, i);
    if (m.k1 == 1 && m.k2 == 1 && m.k3 == 1) continue;
    CHECK(t123[i] == 0.0);
  }
}

TEST_CASE("sym_outer equals the permutation-sum definition") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<so3::Vec3> vecs(3);
    for (auto& v : vecs) v = {u(rng), u(rng), u(rng)};
    const TensorD t = sym_outer(vecs);
    // 3! = 6 permutations, averaged.
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int i1 = 0; i1 < 3; ++i1)
      for (int i2 = 0; i2 < 3; ++i2)
        for (int i3 = 0; i3 < 3; ++i3) {
          double expect = 0.0;
          const int idx[3] = {i1, i2, i3};
          for (const auto& p : perms)
            expect += vecs[0][idx[p[0]]] * vecs[1][idx[p[1]]] * vecs[2][idx[p[2]]];
          expect /= 6.0;
          Multiset m{0, 0, 0};
          for (int v : idx) (v == 0 ? m.k1 : v == 1 ? m.k2 : m.k3) += 1;
          CHECK(t[multiset_index(3, m)] == doctest::Approx(expect).epsilon(1e-14));
        }
  }
}

TEST_CASE("monomial tensors") {
  const TensorD m200 = monomial<double>(2, 0, 0);
  CHECK(m200.at(2, 0, 0) == 1.0);
  const TensorD m110 = monomial<double>(1, 1, 0);
  CHECK(m110.at(1, 1, 0) == doctest::Approx(0.5));

  // (0,0,2) rotated by a quarter turn about the first axis lands on (0,2,0).
  const TensorD rotated = rotate(so3::j_theta(kPi / 2), monomial<double>(0, 0, 2));
  const TensorD expect = monomial<double>(0, 2, 0);
  CHECK(std::sqrt(norm_squared(rotated - expect)) < 1e-14);

  std::mt19937 rng(29);
  const so3::Rotation frame = random_rotation(rng);
  const TensorD in_frame = monomial_in_frame(1, 2, 0, frame);
  CHECK(std::sqrt(norm_squared(in_frame - rotate(frame, monomial<double>(1, 2, 0)))) == 0.0);
}

TEST_CASE("dot product examples and the full-array oracle") {
  const TensorD id = identity_tensor<double>();
  CHECK(dot(id, id) == doctest::Approx(3.0));
  const TensorD e1sq = monomial<double>(2, 0, 0);
  CHECK(dot(e1sq, e1sq) == doctest::Approx(1.0));
  const TensorD e1sq0 = e1sq - (1.0 / 3.0) * id;
  CHECK(dot(e1sq0, e1sq0) == doctest::Approx(2.0 / 3.0));

  std::mt19937 rng(31);
  for (int order = 1; order <= 5; ++order) {
    const TensorD a = random_tensor(order, rng);
    const TensorD b = random_tensor(order, rng);
    CHECK(dot(a, b) == doctest::Approx(full_dot(a, b)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(dot(random_tensor(2, rng), random_tensor(3, rng)), std::invalid_argument);
}

TEST_CASE("trace on compact storage") {
  const TensorD id = identity_tensor<double>();
  const TensorD tr_id = trace(id);
  CHECK(tr_id.order() == 0);
  CHECK(tr_id[0] == doctest::Approx(3.0));

  CHECK(trace(monomial<double>(2, 0, 0))[0] == doctest::Approx(1.0));

  // tr(e1^2 e2^2) = (2 e2^2 + 2 e1^2)/12.
  const TensorD t = trace(monomial<double>(2, 2, 0));
  const TensorD expect =
      (1.0 / 6.0) * (monomial<double>(0, 2, 0) + monomial<double>(2, 0, 0));
  CHECK(std::sqrt(norm_squared(t - expect)) < 1e-14);

  CHECK_THROWS_AS(trace(monomial<double>(1, 0, 0)), std::domain_error);
}

TEST_CASE("identity products and the trace recursion") {
  std::mt19937 rng(37);
  const TensorD v = random_tensor(3, rng);
  CHECK(norm_squared(identity_multiply(0, v) - v) == 0.0);

  TensorD one(0);
  one[0] = 1.0;
  CHECK(std::sqrt(norm_squared(identity_multiply(1, one) - identity_tensor<double>())) < 1e-15);

  // tr(i^k V) recursion, exact in rational arithmetic for n <= 8.
  for (int vorder = 0; vorder <= 4; ++vorder) {
    for (int k = 1; 2 * k + vorder <= 8; ++k) {
      const TensorQ vq = random_rational_tensor(vorder, rng);
      const int n = vorder + 2 * k;
      const TensorQ left = trace(identity_multiply(k, vq));
      const Rational c1(2LL * k * (2 * n - 2 * k + 1), static_cast<long long>(n) * (n - 1));
      const Rational c2(static_cast<long long>(n - 2 * k) * (n - 2 * k - 1),
                        static_cast<long long>(n) * (n - 1));
      TensorQ right = c1 * identity_multiply(k - 1, vq);
      if (vorder >= 2) right += c2 * identity_multiply(k, trace(vq));
      CHECK(left == right);
    }
  }
}

TEST_CASE("rotation action properties") {
  std::mt19937 rng(41);
  for (int order : {1, 2, 3, 4}) {
    const TensorD u = random_tensor(order, rng);
    const TensorD v = random_tensor(order, rng);
    CHECK(std::sqrt(norm_squared(rotate(so3::Rotation::identity(), u) - u)) < 1e-15);

    const so3::Rotation s = random_rotation(rng);
    CHECK(dot(rotate(s, u), rotate(s, v)) == doctest::Approx(dot(u, v)).epsilon(1e-12));

    const so3::Rotation s2 = random_rotation(rng);
    const TensorD lhs = rotate(so3::compose(s, s2), u);
    const TensorD rhs = rotate(s, rotate(s2, u));
    CHECK(std::sqrt(norm_squared(lhs - rhs)) < 1e-12);

    if (order >= 2) {
      const TensorD tl = trace(rotate(s, u));
      const TensorD tr = rotate(s, trace(u));
      CHECK(std::sqrt(norm_squared(tl - tr)) < 1e-12);
    }
  }
}

TEST_CASE("axial rotation mixes the complex-power pair with the phase law") {
  // rotate(j_t, Re((e2+i e3)^k)) = cos(k t) Re + sin(k t) Im, k = 2, t = pi/4.
  using tensors::MPoly;
  const MPoly re = tensors::chebyshev_t(2, MPoly::e2(), MPoly::ident() - MPoly::e1() * MPoly::e1());
  const MPoly im = tensors::chebyshev_u(1, MPoly::e2(), MPoly::ident() - MPoly::e1() * MPoly::e1());
  const TensorD re_t = to_double(re.tensor());
  const TensorD im_t = to_double((im * MPoly::e3()).tensor());
  const double t = kPi / 4;
  const TensorD lhs = rotate(so3::j_theta(t), re_t);
  const TensorD rhs = std::cos(2 * t) * re_t + std::sin(2 * t) * im_t;
  CHECK(std::sqrt(norm_squared(lhs - rhs)) < 1e-13);
}

TEST_CASE("traceless projection") {
  const TensorQ e1sq0 = traceless_project(monomial<Rational>(2, 0, 0));
  TensorQ expect2 = monomial<Rational>(2, 0, 0) - Rational(1, 3) * identity_tensor<Rational>();
  CHECK(e1sq0 == expect2);

  const TensorQ e14_0 = traceless_project(monomial<Rational>(4, 0, 0));
  TensorQ expect4 = monomial<Rational>(4, 0, 0) -
                    Rational(6, 7) * identity_multiply(1, monomial<Rational>(2, 0, 0)) +
                    Rational(3, 35) * identity_power<Rational>(2);
  CHECK(e14_0 == expect4);

  const TensorQ id0 = traceless_project(identity_tensor<Rational>());
  CHECK(id0 == TensorQ(2));

  std::mt19937 rng(43);
  for (int order : {2, 3, 4, 5}) {
    const TensorD u = random_tensor(order, rng);
    const TensorD p = traceless_project(u);
    CHECK(std::sqrt(norm_squared(trace(p))) < 1e-12);
    const TensorD pp = traceless_project(p);
    CHECK(std::sqrt(norm_squared(pp - p)) < 1e-12);
    // Orthogonality of the projection: (U - (U)_0) . (V)_0 = 0.
    const TensorD v = random_tensor(order, rng);
    CHECK(dot(u - p, traceless_project(v)) == doctest::Approx(0.0).epsilon(1e-12));
  }

  // Order 0 and 1 are fixed points.
  const TensorD first = random_tensor(1, rng);
  CHECK(norm_squared(traceless_project(first) - first) == 0.0);
}

TEST_CASE("compact storage size matches the multiset count") {
  for (int n = 0; n <= 8; ++n) {
    CHECK(compact_size(n) == (n + 1) * (n + 2) / 2);
    const TensorD t(n);
    CHECK(t.size() == compact_size(n));
    for (int i = 0; i < t.size(); ++i) {
      const Multiset m = multiset_at(n, i);
      CHECK(multiset_index(n, m) == i);
      CHECK(m.order() == n);
    }
  }
}
