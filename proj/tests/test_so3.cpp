#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

#include "anisotens/so3.hpp"

using namespace anisotens::so3;

namespace {

constexpr double kPi = std::numbers::pi;

Rotation random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double a = g(rng), b = g(rng), c = g(rng), d = g(rng);
  const double n = std::sqrt(a * a + b * b + c * c + d * d);
  return rotation_from_quaternion({a / n, b / n, c / n, d / n});
}

}  // namespace

TEST_CASE("euler chart produces the documented matrix") {
  const Rotation id = rotation_from_euler(EulerAngles(0, 0, 0));
  CHECK(frobenius_distance(id, Rotation::identity()) < 1e-15);

  // alpha = pi/2 with beta = gamma = 0: first column (0,1,0).
  const Rotation r = rotation_from_euler(EulerAngles(kPi / 2, 0, 0));
  CHECK(r(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r(1, 0) == doctest::Approx(1.0));
  CHECK(r(2, 0) == doctest::Approx(0.0).epsilon(1e-14));
  // first row (cos a, -sin a cos g, sin a sin g) = (0, -1, 0)
  CHECK(r(0, 1) == doctest::Approx(-1.0));
  CHECK(r(0, 2) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("euler chart rejects out-of-range angles") {
  CHECK_THROWS_AS(EulerAngles(-0.5, 0, 0), std::domain_error);
  CHECK_THROWS_AS(EulerAngles(3.5, 0, 0), std::domain_error);
  CHECK_THROWS_AS(EulerAngles(1.0, 7.0, 0), std::domain_error);
}

TEST_CASE("random euler angles give proper rotations") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ua(0.0, kPi), ub(0.0, 2 * kPi);
  for (int i = 0; i < 200; ++i) {
    const Rotation r = rotation_from_euler(EulerAngles(ua(rng), ub(rng), ub(rng)));
    CHECK(r.orthonormality_defect() < 1e-12);
  }
}

TEST_CASE("euler round trip recovers the angles") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ua(0.05, kPi - 0.05), ub(0.0, 2 * kPi);
  for (int i = 0; i < 100; ++i) {
    const EulerAngles e(ua(rng), ub(rng), ub(rng));
    const EulerAngles back = euler_from_rotation(rotation_from_euler(e));
    CHECK(back.alpha == doctest::Approx(e.alpha).epsilon(1e-10));
    CHECK(std::abs(std::remainder(back.beta - e.beta, 2 * kPi)) < 1e-9);
    CHECK(std::abs(std::remainder(back.gamma - e.gamma, 2 * kPi)) < 1e-9);
  }
}

TEST_CASE("euler round trip at the degenerate set keeps the combination") {
  // alpha = 0: beta + gamma alone is determined.
  const EulerAngles e(0.0, 1.3, 0.9);
  const Rotation r = rotation_from_euler(e);
  const EulerAngles back = euler_from_rotation(r);
  CHECK(back.alpha == doctest::Approx(0.0));
  CHECK(back.gamma == doctest::Approx(0.0));
  CHECK(std::abs(std::remainder(back.beta - (e.beta + e.gamma), 2 * kPi)) < 1e-9);
  CHECK(frobenius_distance(rotation_from_euler(back), r) < 1e-9);

  const EulerAngles ep(kPi, 2.1, 0.4);
  const Rotation rp = rotation_from_euler(ep);
  const EulerAngles backp = euler_from_rotation(rp);
  CHECK(backp.alpha == doctest::Approx(kPi));
  CHECK(std::abs(std::remainder(backp.beta - (ep.beta - ep.gamma), 2 * kPi)) < 1e-9);
  CHECK(frobenius_distance(rotation_from_euler(backp), rp) < 1e-9);
}

TEST_CASE("quaternion conversion") {
  const Rotation id = rotation_from_quaternion({1, 0, 0, 0});
  CHECK(frobenius_distance(id, Rotation::identity()) < 1e-15);

  // (cos t/2, sin t/2, 0, 0) rotates about the first axis by t.
  for (double t : {0.3, 1.1, 2.9}) {
    const Rotation q = rotation_from_quaternion({std::cos(t / 2), std::sin(t / 2), 0, 0});
    CHECK(frobenius_distance(q, j_theta(t)) < 1e-14);
  }

  // Double cover: q and -q give the same matrix.
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    double a = g(rng), b = g(rng), c = g(rng), d = g(rng);
    const double n = std::sqrt(a * a + b * b + c * c + d * d);
    const Quaternion q{a / n, b / n, c / n, d / n};
    const Quaternion mq{-q.a, -q.b, -q.c, -q.d};
    CHECK(frobenius_distance(rotation_from_quaternion(q), rotation_from_quaternion(mq)) == 0.0);
  }

  CHECK_THROWS_AS(rotation_from_quaternion({1.0, 0.5, 0, 0}), std::invalid_argument);
}

TEST_CASE("compose behaves as matrix product") {
  std::mt19937 rng(5);
  const Rotation r = random_rotation(rng);
  CHECK(frobenius_distance(compose(Rotation::identity(), r), r) < 1e-15);
  CHECK(frobenius_distance(compose(j_theta(kPi / 2), j_theta(kPi / 2)), j_theta(kPi)) < 1e-15);
  CHECK(frobenius_distance(compose(r, r.inverse()), Rotation::identity()) < 1e-12);
}

TEST_CASE("standard generators") {
  const Rotation b = b2();
  CHECK(b(0, 0) == -1.0);
  CHECK(b(1, 1) == 1.0);
  CHECK(b(2, 2) == -1.0);

  // r3 sends the frame (m1,m2,m3) to (m2,m3,m1): columns permute.
  std::mt19937 rng(9);
  const Rotation p = random_rotation(rng);
  const Rotation pr = compose(p, r3());
  for (int i = 0; i < 3; ++i) {
    CHECK(pr.column(0)[i] == doctest::Approx(p.column(1)[i]));
    CHECK(pr.column(1)[i] == doctest::Approx(p.column(2)[i]));
    CHECK(pr.column(2)[i] == doctest::Approx(p.column(0)[i]));
  }

  Rotation v = v5();
  Rotation acc = v;
  for (int i = 1; i < 5; ++i) acc = compose(acc, v);
  CHECK(frobenius_distance(acc, Rotation::identity()) < 1e-10);

  const StandardGenerators gen = standard_generators();
  CHECK(frobenius_distance(gen.j_theta(0.7), j_theta(0.7)) == 0.0);
}

TEST_CASE("haar grid integrates low monomials exactly") {
  const QuadratureGrid grid = haar_grid(3);
  double wsum = 0.0;
  for (const auto& node : grid.nodes) {
    CHECK(node.weight >= 0.0);
    wsum += node.weight;
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));

  CHECK(integrate([](const Rotation&) { return 1.0; }, grid) == doctest::Approx(1.0));
  CHECK(integrate([](const Rotation& p) { return p(0, 0); }, grid) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(integrate([](const Rotation& p) { return p(0, 0) * p(0, 0); }, grid) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("haar grid matches a high resolution reference for monomials") {
  const int n = 3;
  const QuadratureGrid grid = haar_grid(n);
  const QuadratureGrid reference = haar_grid(4 * n);
  std::mt19937 rng(13);
  std::uniform_int_distribution<int> pick(0, 8);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<int> factors;
    const int degree = 1 + trial % (2 * n);
    for (int d = 0; d < degree; ++d) factors.push_back(pick(rng));
    auto f = [&factors](const Rotation& p) {
      double v = 1.0;
      for (int idx : factors) v *= p(idx / 3, idx % 3);
      return v;
    };
    CHECK(integrate(f, grid) == doctest::Approx(integrate(f, reference)).epsilon(1e-12));
  }
}

TEST_CASE("haar integral is left and right invariant") {
  const QuadratureGrid grid = haar_grid(4);
  std::mt19937 rng(17);
  const Rotation t = random_rotation(rng);
  auto f = [](const Rotation& p) {
    return p(0, 0) * p(1, 1) - 2.0 * p(0, 1) * p(2, 0) + p(2, 2) * p(2, 2) * p(0, 0);
  };
  const double base = integrate(f, grid);
  const double left = integrate([&](const Rotation& p) { return f(compose(t, p)); }, grid);
  const double right = integrate([&](const Rotation& p) { return f(compose(p, t)); }, grid);
  CHECK(left == doctest::Approx(base).epsilon(1e-12));
  CHECK(right == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("rotation validation rejects bad matrices") {
  std::array<double, 9> bad{1, 0, 0, 0, 1, 0, 0, 0, 1.1};
  CHECK_THROWS_AS(Rotation::from_array(bad), std::invalid_argument);
  std::array<double, 9> reflect{1, 0, 0, 0, 1, 0, 0, 0, -1};
  CHECK_THROWS_AS(Rotation::from_array(reflect), std::invalid_argument);
}
