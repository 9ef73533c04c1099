#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <thread>

#include "anisotens/so3.hpp"
#include "anisotens/tensor_poly.hpp"
#include "anisotens/traceless_bases.hpp"

using namespace anisotens;
using namespace anisotens::bases;
using tensors::MPoly;
using tensors::TensorD;
using tensors::TensorQ;

namespace {

constexpr double kPi = std::numbers::pi;

bool exactly_traceless(const TensorQ& t) {
  if (t.order() < 2) return true;
  const TensorQ tr = tensors::trace(t);
  for (int i = 0; i < tr.size(); ++i)
    if (!tr[i].is_zero()) return false;
  return true;
}

}  // namespace

TEST_CASE("monomial traceless low order forms") {
  using tensors::identity_multiply;
  using tensors::identity_power;
  using tensors::identity_tensor;
  using tensors::monomial;

  CHECK(monomial_traceless(1, 0, 0) == monomial<Rational>(1, 0, 0));

  TensorQ expect2 = monomial<Rational>(2, 0, 0) - Rational(1, 3) * identity_tensor<Rational>();
  CHECK(monomial_traceless(2, 0, 0) == expect2);

  TensorQ expect4 = monomial<Rational>(4, 0, 0) -
                    Rational(6, 7) * identity_multiply(1, monomial<Rational>(2, 0, 0)) +
                    Rational(3, 35) * identity_power<Rational>(2);
  CHECK(monomial_traceless(4, 0, 0) == expect4);
}

TEST_CASE("monomial traceless members have exactly zero trace") {
  for (int n = 1; n <= 6; ++n)
    for (int k3 = 0; k3 <= std::min(3, n); ++k3)
      for (int k1 = 0; k1 + k3 <= n; ++k1) CHECK(exactly_traceless(monomial_traceless(k1, n - k1 - k3, k3)));
}

TEST_CASE("both bases have dimension 2n+1 and full rank") {
  for (int n = 0; n <= 8; ++n) {
    const TensorSpace& mono = monomial_basis(n);
    const TensorSpace& orth = orthogonal_basis(n);
    CHECK(mono.dimension() == 2 * n + 1);
    CHECK(orth.dimension() == 2 * n + 1);

    std::vector<std::vector<double>> rows;
    for (const auto& b : mono.basis) {
      std::vector<double> r(b.size());
      for (int i = 0; i < b.size(); ++i) r[static_cast<std::size_t>(i)] = b[i];
      rows.push_back(r);
    }
    CHECK(numeric_rank(rows) == 2 * n + 1);
  }
  // Exact zero trace at order 6 for every member of both bases.
  for (const auto& b : monomial_basis_exact(6).basis) CHECK(exactly_traceless(b));
  for (const auto& b : orthogonal_basis_exact(6).basis) CHECK(exactly_traceless(b));
}

TEST_CASE("orthogonal basis is pairwise orthogonal") {
  for (int n = 1; n <= 6; ++n) {
    const TensorSpace& orth = orthogonal_basis(n);
    double max_diag = 0.0;
    for (const auto& b : orth.basis) max_diag = std::max(max_diag, tensors::norm_squared(b));
    for (int i = 0; i < orth.dimension(); ++i)
      for (int j = i + 1; j < orth.dimension(); ++j)
        CHECK(std::abs(tensors::dot(orth.basis[i], orth.basis[j])) < 1e-12 * max_diag);
  }
}

TEST_CASE("low order orthogonal members match the named forms") {
  // n = 1: {e1, e2, e3}.
  const TensorSpace& o1 = orthogonal_basis(1);
  CHECK(std::sqrt(tensors::norm_squared(o1.basis[0] - tensors::monomial<double>(1, 0, 0))) < 1e-15);
  CHECK(std::sqrt(tensors::norm_squared(o1.basis[1] - tensors::monomial<double>(0, 1, 0))) < 1e-15);
  CHECK(std::sqrt(tensors::norm_squared(o1.basis[2] - tensors::monomial<double>(0, 0, 1))) < 1e-15);

  // n = 2 members: (e1^2)_0, e1e2, 2e2^2-(i-e1^2), e1e3, 2e2e3.
  const TensorSpace& o2 = orthogonal_basis(2);
  CHECK(std::sqrt(tensors::norm_squared(
            o2.basis[0] - tensors::to_double(monomial_traceless(2, 0, 0)))) < 1e-15);
  CHECK(o2.basis[1].at(1, 1, 0) == doctest::Approx(0.5));
  CHECK(o2.basis[4].at(0, 1, 1) == doctest::Approx(1.0));  // 2 e2 e3
}

TEST_CASE("the two bases span the same space") {
  for (int n = 1; n <= 8; ++n) {
    const TensorSpace& mono = monomial_basis(n);
    const TensorSpace& orth = orthogonal_basis(n);
    for (const auto& m : mono.basis) {
      const ExpandResult res = expand(m, orth);
      CHECK(res.residual < 1e-10);
    }
    CHECK(max_principal_angle(mono, orth) < 1e-10);
  }
}

TEST_CASE("expansion in a basis") {
  const TensorSpace& orth = orthogonal_basis(3);
  for (int s = 0; s < orth.dimension(); ++s) {
    const ExpandResult res = expand(orth.basis[s], orth);
    for (int i = 0; i < orth.dimension(); ++i)
      CHECK(res.coeffs[static_cast<std::size_t>(i)] == doctest::Approx(i == s ? 1.0 : 0.0).epsilon(1e-12));
    CHECK(res.residual < 1e-13);
  }
  const ExpandResult zero = expand(TensorD(3), orth);
  for (double c : zero.coeffs) CHECK(c == doctest::Approx(0.0));

  // (e1^4)_0 sits in the leading slot of the order-4 orthogonal basis.
  const TensorD e14 = tensors::to_double(monomial_traceless(4, 0, 0));
  const ExpandResult res4 = expand(e14, orthogonal_basis(4));
  CHECK(res4.coeffs[0] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < res4.coeffs.size(); ++i)
    CHECK(res4.coeffs[i] == doctest::Approx(0.0).epsilon(1e-12));

  // Tensors outside the span are flagged by the residual.
  const ExpandResult off = expand(tensors::identity_multiply(1, tensors::monomial<double>(1, 0, 0)),
                                  orthogonal_basis(3));
  CHECK(off.residual > 1e-3);
}

TEST_CASE("rotational Laplacian examples") {
  // -L^2 e1 = 2 e1.
  const MPoly l1 = laplacian_monomial(1, 0, 0, 0);
  CHECK(l1.tensor() == Rational(2) * tensors::monomial<Rational>(1, 0, 0));
  // The identity tensor is constant: image 0.
  const MPoly l0 = laplacian_monomial(0, 0, 0, 1);
  CHECK(l0.empty());
}

TEST_CASE("basis members are Laplacian eigenfunctions, exactly") {
  auto check_poly = [](const MPoly& p, int n) {
    MPoly image;
    for (const auto& [term, coef] : p.terms())
      image += coef * laplacian_monomial(term.k1, term.k2, term.k3, term.l);
    const TensorQ lhs = image.tensor();
    const TensorQ rhs = Rational(static_cast<long long>(n) * (n + 1)) * p.tensor();
    CHECK(lhs == rhs);
  };
  for (int n = 1; n <= 6; ++n) {
    for (int k3 = 0; k3 <= 1; ++k3)
      for (int k1 = 0; k1 + k3 <= n; ++k1) check_poly(monomial_traceless_poly(k1, n - k1 - k3, k3), n);
    for (int m = 0; m <= 2 * n; ++m) check_poly(orthogonal_member_poly(n, m), n);
  }
}

TEST_CASE("scalar Chebyshev and Jacobi consistency") {
  for (int k = 0; k <= 6; ++k) {
    for (int i = 0; i < 64; ++i) {
      const double theta = (2 * kPi * i) / 64 + 0.017;
      CHECK(tensors::chebyshev_t_scalar(k, std::cos(theta)) ==
            doctest::Approx(std::cos(k * theta)).epsilon(1e-12));
      if (std::abs(std::sin(theta)) > 1e-3)
        CHECK(tensors::chebyshev_u_scalar(k, std::cos(theta)) ==
              doctest::Approx(std::sin((k + 1) * theta) / std::sin(theta)).epsilon(1e-9));
    }
  }
  // Tensor-level check: T~_k(e2, i - e1^2) contracted with v^k, v in the
  // e2-e3 plane, reproduces cos(k theta).
  for (int k = 1; k <= 6; ++k) {
    const MPoly tk =
        tensors::chebyshev_t(k, MPoly::e2(), MPoly::ident() - MPoly::e1() * MPoly::e1());
    const TensorD tk_t = tensors::to_double(tk.tensor());
    for (int i = 0; i < 64; ++i) {
      const double theta = (2 * kPi * i) / 64 + 0.1;
      const so3::Vec3 v{0.0, std::cos(theta), std::sin(theta)};
      std::vector<so3::Vec3> copies(static_cast<std::size_t>(k), v);
      const TensorD vk = tensors::sym_outer(copies);
      CHECK(tensors::dot(tk_t, vk) == doctest::Approx(std::cos(k * theta)).epsilon(1e-12));
    }
  }
  // Monic Jacobi prefactors are proportional to the textbook polynomials.
  for (int k = 1; k <= 4; ++k)
    for (int mu = 0; mu <= 3; ++mu) {
      const MPoly monic = tensors::jacobi_monic(k, k + mu, MPoly::e1(), MPoly::ident());
      const MPoly text = tensors::jacobi_equal_index(k, mu, MPoly::e1(), MPoly::ident());
      const TensorQ a = monic.tensor();
      const TensorQ b = text.tensor();
      // b = lambda a for a single rational lambda.
      Rational lambda(0);
      for (int i = 0; i < a.size(); ++i)
        if (!a[i].is_zero()) {
          lambda = b[i] / a[i];
          break;
        }
      CHECK(!(lambda == Rational(0)));
      CHECK(b == lambda * a);
    }
}

TEST_CASE("reduced Wigner matrix elements") {
  CHECK(wigner_d_small(0, 0, 0, 0.7) == doctest::Approx(1.0));
  for (double a : {0.2, 1.0, 2.4}) CHECK(wigner_d_small(1, 0, 0, a) == doctest::Approx(std::cos(a)));
  // Convention: d(0) = delta.
  for (int m = -2; m <= 2; ++m)
    for (int mp = -2; mp <= 2; ++mp)
      CHECK(wigner_d_small(2, m, mp, 0.0) == doctest::Approx(m == mp ? 1.0 : 0.0));
  CHECK_THROWS_AS(wigner_d_small(1, 2, 0, 0.3), std::out_of_range);
}

TEST_CASE("first order Wigner functions span the matrix entries") {
  // The 9 D^1_{mm'} and the 9 entry functions p_ij span the same space:
  // the joint 18-column system still has rank 9 on a Haar grid.
  const so3::QuadratureGrid grid = so3::haar_grid(4);
  std::vector<std::vector<std::complex<double>>> cols(18);
  for (auto& c : cols) c.reserve(grid.nodes.size());
  for (const auto& node : grid.nodes) {
    const so3::EulerAngles e = so3::euler_from_rotation(node.p);
    int c = 0;
    for (int m = -1; m <= 1; ++m)
      for (int mp = -1; mp <= 1; ++mp) cols[c++].push_back(wigner_D(1, m, mp, e));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cols[c++].push_back(node.p(i, j));
  }
  // Weighted Gram matrix, complex.
  std::vector<std::vector<std::complex<double>>> gram(18, std::vector<std::complex<double>>(18));
  for (int a = 0; a < 18; ++a)
    for (int b = 0; b < 18; ++b) {
      std::complex<double> s = 0.0;
      for (std::size_t r = 0; r < grid.nodes.size(); ++r)
        s += grid.nodes[r].weight * std::conj(cols[a][r]) * cols[b][r];
      gram[a][b] = s;
    }
  // Rank via the real embedding.
  std::vector<std::vector<double>> real_rows;
  for (int a = 0; a < 18; ++a) {
    std::vector<double> re(36), im(36);
    for (int b = 0; b < 18; ++b) {
      re[b] = gram[a][b].real();
      re[18 + b] = -gram[a][b].imag();
      im[b] = gram[a][b].imag();
      im[18 + b] = gram[a][b].real();
    }
    real_rows.push_back(re);
    real_rows.push_back(im);
  }
  CHECK(numeric_rank(real_rows, 1e-8) == 18);  // complex rank 9
}

TEST_CASE("component functions are complete and band orthogonal") {
  // The (2n+1)^2 functions X_j . rotate(p, X_i) have full rank at fixed
  // order and integrate to zero against every lower order.
  const int n = 2;
  const TensorSpace on_n = orthonormalized(orthogonal_basis(n));
  const TensorSpace on_m = orthonormalized(orthogonal_basis(1));
  const so3::QuadratureGrid grid = so3::haar_grid(2 * n + 1);

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < on_n.dimension(); ++i)
    for (int j = 0; j < on_n.dimension(); ++j) {
      std::vector<double> row;
      row.reserve(grid.nodes.size());
      for (const auto& node : grid.nodes) {
        const TensorD rot = tensors::rotate(node.p, on_n.basis[i]);
        row.push_back(std::sqrt(node.weight) * tensors::dot(on_n.basis[j], rot));
      }
      rows.push_back(std::move(row));
    }
  CHECK(numeric_rank(rows, 1e-9) == (2 * n + 1) * (2 * n + 1));

  double worst = 0.0;
  for (int i = 0; i < on_n.dimension(); ++i)
    for (int j = 0; j < on_n.dimension(); ++j)
      for (int a = 0; a < on_m.dimension(); ++a)
        for (int b = 0; b < on_m.dimension(); ++b) {
          const double v = so3::integrate(
              [&](const so3::Rotation& p) {
                return tensors::dot(on_n.basis[j], tensors::rotate(p, on_n.basis[i])) *
                       tensors::dot(on_m.basis[b], tensors::rotate(p, on_m.basis[a]));
              },
              grid);
          worst = std::max(worst, std::abs(v));
        }
  CHECK(worst < 1e-12);
}

TEST_CASE("memoized bases are safe under concurrent first use") {
  std::vector<std::thread> pool;
  std::vector<int> dims(8, 0);
  for (int t = 0; t < 8; ++t)
    pool.emplace_back([t, &dims] {
      const int n = 7 + (t % 2);  // two orders, four threads racing on each
      dims[static_cast<std::size_t>(t)] = bases::orthogonal_basis(n).dimension() +
                                          bases::monomial_basis(n).dimension();
    });
  for (auto& th : pool) th.join();
  for (int t = 0; t < 8; ++t) CHECK(dims[static_cast<std::size_t>(t)] == 2 * (2 * (7 + t % 2) + 1));
}

TEST_CASE("basis ordering is the documented one") {
  // Monomial basis: k3 = 0 block with k1 descending, then k3 = 1.
  const TensorSpaceQ& mono = monomial_basis_exact(2);
  CHECK(mono.basis[0] == monomial_traceless(2, 0, 0));
  CHECK(mono.basis[1] == monomial_traceless(1, 1, 0));
  CHECK(mono.basis[2] == monomial_traceless(0, 2, 0));
  CHECK(mono.basis[3] == monomial_traceless(1, 0, 1));
  CHECK(mono.basis[4] == monomial_traceless(0, 1, 1));

  // Orthogonal slots: T family k = n..0, then U family k = n-1..0.
  const OrthogonalSlot s0 = orthogonal_slot(3, 0);
  CHECK(!s0.u_family);
  CHECK(s0.jacobi_index == 3);
  const OrthogonalSlot s3 = orthogonal_slot(3, 3);
  CHECK(!s3.u_family);
  CHECK(s3.jacobi_index == 0);
  const OrthogonalSlot s4 = orthogonal_slot(3, 4);
  CHECK(s4.u_family);
  CHECK(s4.jacobi_index == 2);
  for (int m = 0; m <= 6; ++m) CHECK(orthogonal_member(3, orthogonal_slot(3, m)) == m);
}
