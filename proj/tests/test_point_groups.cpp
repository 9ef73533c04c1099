#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

#include "anisotens/point_groups.hpp"
#include "anisotens/traceless_bases.hpp"

using namespace anisotens;
using namespace anisotens::groups;
using bases::TensorSpace;
using tensors::TensorD;

namespace {

TensorD random_tensor(int order, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorD t(order);
  for (int i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

bool group_closed(const PointGroup& g) {
  for (const auto& a : g.elements)
    for (const auto& b : g.elements) {
      const so3::Rotation p = so3::compose(a, b);
      bool found = false;
      for (const auto& c : g.elements)
        if (so3::frobenius_distance(p, c) < 1e-9) found = true;
      if (!found) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("group orders from generator closure") {
  CHECK(build_group(GroupKind::Cn, 4).order() == 4);
  for (int n = 1; n <= 6; ++n) {
    CHECK(build_group(GroupKind::Cn, n).order() == static_cast<std::size_t>(n));
    CHECK(build_group(GroupKind::Dn, n).order() == static_cast<std::size_t>(2 * n));
  }
  CHECK(build_group(GroupKind::Tetrahedral).order() == 12);
  CHECK(build_group(GroupKind::Octahedral).order() == 24);
  CHECK(build_group(GroupKind::Icosahedral).order() == 60);
}

TEST_CASE("groups contain identity, inverses, and are closed") {
  for (const auto& g : {build_group(GroupKind::Cn, 4), build_group(GroupKind::Dn, 3),
                        build_group(GroupKind::Tetrahedral), build_group(GroupKind::Octahedral)}) {
    bool has_id = false;
    for (const auto& e : g.elements)
      if (so3::frobenius_distance(e, so3::Rotation::identity()) < 1e-12) has_id = true;
    CHECK(has_id);
    CHECK(group_closed(g));
    for (const auto& e : g.elements) {
      bool has_inv = false;
      for (const auto& f : g.elements)
        if (so3::frobenius_distance(f, e.inverse()) < 1e-9) has_inv = true;
      CHECK(has_inv);
    }
  }
  // C4 elements are exactly the powers of the quarter turn.
  const PointGroup c4 = build_group(GroupKind::Cn, 4);
  for (const auto& e : c4.elements) {
    bool is_power = false;
    for (int k = 0; k < 4; ++k)
      if (so3::frobenius_distance(e, so3::j_theta(k * std::numbers::pi / 2)) < 1e-9) is_power = true;
    CHECK(is_power);
  }
  // The icosahedral closure contains the five-fold generator.
  const PointGroup icosa = build_group(GroupKind::Icosahedral);
  bool has_v5 = false;
  for (const auto& e : icosa.elements)
    if (so3::frobenius_distance(e, so3::v5()) < 1e-9) has_v5 = true;
  CHECK(has_v5);
}

TEST_CASE("group labels parse and print") {
  CHECK(parse_group("C3").label() == "C3");
  CHECK(parse_group("D6").label() == "D6");
  CHECK(parse_group("Cinf").label() == "Cinf");
  CHECK(parse_group("T").label() == "T");
  CHECK_THROWS_AS(parse_group("X9"), std::invalid_argument);
}

TEST_CASE("Reynolds averaging basics") {
  const PointGroup c2 = build_group(GroupKind::Cn, 2);
  const TensorD e2 = tensors::monomial<double>(0, 1, 0);
  CHECK(std::sqrt(tensors::norm_squared(reynolds_average(e2, c2))) < 1e-15);
  const TensorD e1 = tensors::monomial<double>(1, 0, 0);
  CHECK(std::sqrt(tensors::norm_squared(reynolds_average(e1, c2) - e1)) < 1e-15);

  const PointGroup tetra = build_group(GroupKind::Tetrahedral);
  const TensorD q2 = tensors::to_double(bases::monomial_traceless(2, 0, 0));
  CHECK(std::sqrt(tensors::norm_squared(reynolds_average(q2, tetra))) < 1e-14);
}

TEST_CASE("Reynolds averaging is an orthogonal projection") {
  std::mt19937 rng(51);
  for (const auto& g : {build_group(GroupKind::Dn, 3), build_group(GroupKind::Tetrahedral),
                        build_group(GroupKind::Cinf)}) {
    for (int order : {2, 3, 4}) {
      const TensorD t = random_tensor(order, rng);
      const TensorD u = random_tensor(order, rng);
      const TensorD tg = reynolds_average(t, g);
      const TensorD tgg = reynolds_average(tg, g);
      CHECK(std::sqrt(tensors::norm_squared(tgg - tg)) < 1e-12);
      // Self-adjoint: dot(T^G, U) = dot(T, U^G).
      CHECK(tensors::dot(tg, u) == doctest::Approx(tensors::dot(t, reynolds_average(u, g))).epsilon(1e-11));
    }
  }
}

TEST_CASE("numeric invariant spaces match the documented dimensions") {
  const PointGroup dinf = build_group(GroupKind::Dinf);
  const InvariantSpace dinf2 = invariant_space_numeric(dinf, 2);
  CHECK(dinf2.dimension() == 1);
  const TensorD q2 = tensors::to_double(bases::monomial_traceless(2, 0, 0));
  const bases::ExpandResult in_span = bases::expand(q2, dinf2.space);
  CHECK(in_span.residual < 1e-10);

  const PointGroup tetra = build_group(GroupKind::Tetrahedral);
  const InvariantSpace t3 = invariant_space_numeric(tetra, 3);
  CHECK(t3.dimension() == 1);
  const TensorD prod = tensors::monomial<double>(1, 1, 1);
  CHECK(bases::expand(prod, t3.space).residual < 1e-10);

  const PointGroup icosa = build_group(GroupKind::Icosahedral);
  for (int l = 1; l <= 5; ++l) CHECK(invariant_space_numeric(icosa, l).dimension() == 0);
  CHECK(invariant_space_numeric(icosa, 6).dimension() == 1);
}

TEST_CASE("tetrahedral dimension table and the axial rules") {
  const PointGroup tetra = build_group(GroupKind::Tetrahedral);
  const int expected[6] = {0, 0, 1, 1, 0, 2};
  for (int l = 1; l <= 6; ++l) {
    CHECK(invariant_space_analytic(tetra, l).dimension() == expected[l - 1]);
    CHECK(invariant_space_numeric(tetra, l).dimension() == expected[l - 1]);
  }
  const PointGroup dinf = build_group(GroupKind::Dinf);
  for (int l = 1; l <= 6; ++l)
    CHECK(invariant_space_analytic(dinf, l).dimension() == (l % 2 == 0 ? 1 : 0));

  // dim A^{Cn,l} = #{j>=0: jn<=l} + #{j>=1: jn<=l}.
  for (int n = 2; n <= 4; ++n) {
    const PointGroup cn = build_group(GroupKind::Cn, n);
    for (int l = 1; l <= 6; ++l) {
      int expect = 0;
      for (int j = 0; j * n <= l; ++j) expect += 1;
      for (int j = 1; j * n <= l; ++j) expect += 1;
      CHECK(invariant_space_analytic(cn, l).dimension() == expect);
    }
  }

  // D_n and D_inf agree below order n.
  for (int n = 3; n <= 6; ++n) {
    const PointGroup dn = build_group(GroupKind::Dn, n);
    for (int l = 1; l < n; ++l) {
      const InvariantSpace a = invariant_space_analytic(dn, l);
      const InvariantSpace b = invariant_space_analytic(dinf, l);
      CHECK(a.dimension() == b.dimension());
      if (a.dimension() > 0) CHECK(bases::max_principal_angle(a.space, b.space) < 1e-10);
    }
    // At order n they differ.
    CHECK(invariant_space_analytic(dn, n).dimension() >
          invariant_space_analytic(dinf, n).dimension());
  }
}

TEST_CASE("analytic invariant members are invariant under the generators") {
  for (const char* label : {"C3", "D4", "T", "O"}) {
    const PointGroup g = parse_group(label);
    for (int l = 2; l <= 6; ++l) {
      const InvariantSpace inv = invariant_space_analytic(g, l);
      for (const auto& x : inv.space.basis) {
        for (const auto& s : g.elements) {
          const TensorD moved = tensors::rotate(s, x);
          CHECK(std::sqrt(tensors::norm_squared(moved - x)) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("numeric and analytic constructions agree") {
  std::vector<PointGroup> all;
  for (int n = 2; n <= 6; ++n) {
    all.push_back(build_group(GroupKind::Cn, n));
    all.push_back(build_group(GroupKind::Dn, n));
  }
  all.push_back(build_group(GroupKind::Cinf));
  all.push_back(build_group(GroupKind::Dinf));
  all.push_back(build_group(GroupKind::Tetrahedral));
  all.push_back(build_group(GroupKind::Octahedral));
  all.push_back(build_group(GroupKind::Icosahedral));
  for (const auto& g : all) {
    for (int l = 1; l <= 6; ++l) {
      const InvariantSpace numeric = invariant_space_numeric(g, l);
      const InvariantSpace analytic = invariant_space_analytic(g, l);
      CHECK(numeric.dimension() == analytic.dimension());
      if (numeric.dimension() > 0)
        CHECK(bases::max_principal_angle(numeric.space, analytic.space) < 1e-8);
    }
  }
}

TEST_CASE("octahedral order four space and the icosahedral ratio") {
  const PointGroup octa = build_group(GroupKind::Octahedral);
  const InvariantSpace o4 = invariant_space_analytic(octa, 4);
  CHECK(o4.dimension() == 1);
  // Span of (m1^2 m2^2 + m2^2 m3^2 + m3^2 m1^2)_0.
  using tensors::MPoly;
  const MPoly y1 = MPoly::e1(), y2 = MPoly::e2(), y3 = MPoly::e3();
  const MPoly s1 = y1 * y1 * (y2 * y2) + y2 * y2 * (y3 * y3) + y3 * y3 * (y1 * y1);
  const TensorD expect = tensors::traceless_project(tensors::to_double(s1.tensor()));
  CHECK(bases::expand(expect, o4.space).residual < 1e-12);

  // Icosahedral order six: b = -(sqrt 5 / 11) a.
  const PointGroup icosa = build_group(GroupKind::Icosahedral);
  const InvariantSpace i6 = invariant_space_analytic(icosa, 6);
  REQUIRE(i6.dimension() == 1);
  const TensorD member = i6.space.basis[0];
  const TensorD xa = tensors::traceless_project(
      tensors::to_double((y1 * y1 * (y2 * y2) * (y3 * y3)).tensor()));
  const TensorD xb = tensors::traceless_project(tensors::to_double(
      ((y1 * y1 - y2 * y2) * (y2 * y2 - y3 * y3) * (y3 * y3 - y1 * y1)).tensor()));
  // member = a xa + b xb: solve the 2x2 normal system.
  const double gaa = tensors::dot(xa, xa), gbb = tensors::dot(xb, xb), gab = tensors::dot(xa, xb);
  const double ra = tensors::dot(member, xa), rb = tensors::dot(member, xb);
  const double det = gaa * gbb - gab * gab;
  const double a = (ra * gbb - rb * gab) / det;
  const double b = (gaa * rb - gab * ra) / det;
  CHECK(b / a == doctest::Approx(-std::sqrt(5.0) / 11.0).epsilon(1e-10));
}

TEST_CASE("invariant spaces shrink along subgroup inclusions") {
  std::mt19937 rng(57);
  const PointGroup d2 = build_group(GroupKind::Dn, 2);
  const PointGroup tetra = build_group(GroupKind::Tetrahedral);
  for (int l = 2; l <= 6; ++l) {
    const InvariantSpace big = invariant_space_analytic(tetra, l);
    const InvariantSpace small = invariant_space_analytic(d2, l);
    for (const auto& x : big.space.basis) {
      if (small.dimension() == 0) {
        CHECK(big.dimension() == 0);
        continue;
      }
      CHECK(bases::expand(x, small.space).residual < 1e-10);
    }
  }
}

TEST_CASE("subgroup relations with the frame conventions") {
  CHECK(is_subgroup(parse_group("C2"), parse_group("D2")));
  CHECK(is_subgroup(parse_group("D2"), parse_group("T")));
  CHECK(is_subgroup(parse_group("T"), parse_group("O")));
  CHECK(is_subgroup(parse_group("D2"), parse_group("D4")));
  CHECK(is_subgroup(parse_group("C2"), parse_group("C4")));
  CHECK(is_subgroup(parse_group("C3"), parse_group("Cinf")));
  CHECK(is_subgroup(parse_group("D3"), parse_group("Dinf")));
  CHECK(is_subgroup(parse_group("Cinf"), parse_group("Dinf")));
  CHECK(!is_subgroup(parse_group("Dinf"), parse_group("Cinf")));
  CHECK(!is_subgroup(parse_group("C3"), parse_group("C4")));
  CHECK(!is_subgroup(parse_group("D3"), parse_group("D4")));
  CHECK(!is_subgroup(parse_group("D2"), parse_group("Cinf")));

  // Three-fold axial groups live inside the polyhedral groups only after
  // the three-fold frame change.
  CHECK(is_subgroup(parse_group("C3"), parse_group("T")));
  CHECK(is_subgroup(parse_group("D3"), parse_group("O")));
  // Plain element inclusion fails for them: the axes differ.
  const PointGroup c3 = parse_group("C3");
  const PointGroup tetra = parse_group("T");
  bool plain = true;
  for (const auto& e : c3.elements) {
    bool found = false;
    for (const auto& f : tetra.elements)
      if (so3::frobenius_distance(e, f) < 1e-9) found = true;
    plain = plain && found;
  }
  CHECK(!plain);
}

TEST_CASE("generator closure detects non-closing input") {
  // An irrational rotation angle never closes; the element cap must fire.
  CHECK_THROWS_AS(generator_closure({so3::j_theta(1.0)}, 64), std::runtime_error);
}
