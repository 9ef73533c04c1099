#include "anisotens/traceless_bases.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace anisotens::bases {

using tensors::MPoly;
using tensors::Multiset;
using tensors::PolyTerm;
using tensors::SymTensor;

TensorSpace to_double(const TensorSpaceQ& s) {
  TensorSpace out;
  out.order = s.order;
  out.label = s.label;
  out.basis.reserve(s.basis.size());
  for (const auto& b : s.basis) out.basis.push_back(tensors::to_double(b));
  return out;
}

namespace {

Rational traceless_coefficient(int k1, int k2, int k3, int j1, int j2) {
  const int n = k1 + k2 + k3;
  const int j = j1 + j2;
  Rational c = Rational::binomial(j, j1) * Rational::factorial(k1) * Rational::factorial(k2) *
               Rational::double_factorial(2 * n - 1 - 2 * j) /
               (Rational::factorial(k1 - 2 * j1) * Rational::factorial(k2 - 2 * j2) *
                Rational::double_factorial(2 * n - 1) * Rational::double_factorial(2 * j));
  if (j % 2) c = -c;
  return c;
}

}  // namespace

MPoly monomial_traceless_poly(int k1, int k2, int k3) {
  if (k1 < 0 || k2 < 0 || k3 < 0)
    throw std::domain_error("monomial_traceless_poly: negative exponent");
  if (k3 >= 2) {
    // Reduce e3^{2j} through e3^2 = i - e1^2 - e2^2, whose i-part drops out
    // of the traceless representative: substitute (-e1^2 - e2^2)^j.
    const int j = k3 / 2;
    MPoly out;
    for (int r = 0; r <= j; ++r) {
      Rational c = Rational::binomial(j, r);
      if (j % 2) c = -c;
      out += c * monomial_traceless_poly(k1 + 2 * r, k2 + 2 * (j - r), k3 - 2 * j);
    }
    return out;
  }
  MPoly p;
  for (int j1 = 0; 2 * j1 <= k1; ++j1)
    for (int j2 = 0; 2 * j2 <= k2; ++j2)
      p += traceless_coefficient(k1, k2, k3, j1, j2) *
           MPoly::term(PolyTerm{k1 - 2 * j1, k2 - 2 * j2, k3, j1 + j2}, 1);
  return p;
}

MPoly orthogonal_member_poly(int order, int member) {
  const OrthogonalSlot slot = orthogonal_slot(order, member);
  const MPoly y1 = MPoly::e1(), y2 = MPoly::e2(), y3 = MPoly::e3(), id = MPoly::ident();
  const MPoly z2 = id - y1 * y1;
  const MPoly jac = tensors::jacobi_monic(slot.jacobi_index, order, y1, id);
  if (!slot.u_family) return jac * tensors::chebyshev_t(slot.cheb_index, y2, z2);
  return jac * tensors::chebyshev_u(slot.cheb_index - 1, y2, z2) * y3;
}

const TensorQ& monomial_traceless(int k1, int k2, int k3) {
  if (k1 < 0 || k2 < 0 || k3 < 0) throw std::domain_error("monomial_traceless: negative exponent");
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<TensorQ>> cache;
  const auto key = std::make_tuple(k1, k2, k3);
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  TensorQ value = monomial_traceless_poly(k1, k2, k3).tensor();
  std::scoped_lock lock(mu);
  auto [pos, _] = cache.emplace(key, std::make_unique<TensorQ>(std::move(value)));
  return *pos->second;
}

const TensorSpaceQ& monomial_basis_exact(int n) {
  if (n < 0) throw std::domain_error("monomial_basis: negative order");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<TensorSpaceQ>> cache;
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
  }
  TensorSpaceQ space;
  space.order = n;
  space.label = "monomial";
  for (int k3 = 0; k3 <= std::min(1, n); ++k3)
    for (int k1 = n - k3; k1 >= 0; --k1) space.basis.push_back(monomial_traceless(k1, n - k3 - k1, k3));
  std::scoped_lock lock(mu);
  auto [pos, _] = cache.emplace(n, std::make_unique<TensorSpaceQ>(std::move(space)));
  return *pos->second;
}

const TensorSpaceQ& orthogonal_basis_exact(int n) {
  if (n < 0) throw std::domain_error("orthogonal_basis: negative order");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<TensorSpaceQ>> cache;
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
  }
  TensorSpaceQ space;
  space.order = n;
  space.label = "orthogonal";
  for (int m = 0; m <= 2 * n; ++m) space.basis.push_back(orthogonal_member_poly(n, m).tensor());
  std::scoped_lock lock(mu);
  auto [pos, _] = cache.emplace(n, std::make_unique<TensorSpaceQ>(std::move(space)));
  return *pos->second;
}

namespace {

const TensorSpace& cached_double(int n, const TensorSpaceQ& (*exact)(int),
                                 std::map<int, std::unique_ptr<TensorSpace>>& cache,
                                 std::mutex& mu) {
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
  }
  TensorSpace value = to_double(exact(n));
  std::scoped_lock lock(mu);
  auto [pos, _] = cache.emplace(n, std::make_unique<TensorSpace>(std::move(value)));
  return *pos->second;
}

}  // namespace

const TensorSpace& monomial_basis(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<TensorSpace>> cache;
  return cached_double(n, &monomial_basis_exact, cache, mu);
}

const TensorSpace& orthogonal_basis(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<TensorSpace>> cache;
  return cached_double(n, &orthogonal_basis_exact, cache, mu);
}

OrthogonalSlot orthogonal_slot(int order, int member) {
  if (member < 0 || member > 2 * order) throw std::out_of_range("orthogonal_slot");
  if (member <= order) return {false, order - member, member};
  const int k = order - 1 - (member - order - 1);
  return {true, k, order - k};
}

int orthogonal_member(int order, const OrthogonalSlot& slot) {
  if (!slot.u_family) return order - slot.jacobi_index;
  return order + 1 + (order - 1 - slot.jacobi_index);
}

namespace {

Eigen::VectorXd metric_coords(const TensorD& t) {
  Eigen::VectorXd v(t.size());
  for (int i = 0; i < t.size(); ++i) {
    const Multiset m = tensors::multiset_at(t.order(), i);
    v[i] = std::sqrt(static_cast<double>(tensors::multiplicity(m))) * t[i];
  }
  return v;
}

Eigen::MatrixXd coord_matrix(const TensorSpace& s) {
  const int dim = tensors::compact_size(s.order);
  Eigen::MatrixXd a(dim, s.dimension());
  for (int j = 0; j < s.dimension(); ++j) a.col(j) = metric_coords(s.basis[j]);
  return a;
}

}  // namespace

ExpandResult expand(const TensorD& u, const TensorSpace& space) {
  if (u.order() != space.order) throw std::invalid_argument("expand: order mismatch");
  const Eigen::MatrixXd a = coord_matrix(space);
  const Eigen::VectorXd rhs = metric_coords(u);
  Eigen::VectorXd c = a.colPivHouseholderQr().solve(rhs);
  const double residual = (a * c - rhs).norm();
  ExpandResult out;
  out.coeffs.assign(c.data(), c.data() + c.size());
  out.residual = residual;
  return out;
}

TensorD combine(const TensorSpace& space, const std::vector<double>& coeffs) {
  if (coeffs.size() != space.basis.size()) throw std::invalid_argument("combine: size mismatch");
  TensorD out(space.order);
  for (std::size_t i = 0; i < coeffs.size(); ++i) out += coeffs[i] * space.basis[i];
  return out;
}

MPoly laplacian_monomial(int k1, int k2, int k3, int l) {
  // The identity factors are constant under the rotational derivatives, so
  // the eigenvalue factor sees the monomial degree only.
  const int n = k1 + k2 + k3;
  MPoly out = Rational(static_cast<long long>(n) * (n + 1)) * MPoly::term({k1, k2, k3, l}, 1);
  if (k1 >= 2)
    out -= Rational(static_cast<long long>(k1) * (k1 - 1)) * MPoly::term({k1 - 2, k2, k3, l + 1}, 1);
  if (k2 >= 2)
    out -= Rational(static_cast<long long>(k2) * (k2 - 1)) * MPoly::term({k1, k2 - 2, k3, l + 1}, 1);
  if (k3 >= 2)
    out -= Rational(static_cast<long long>(k3) * (k3 - 1)) * MPoly::term({k1, k2, k3 - 2, l + 1}, 1);
  return out;
}

double wigner_d_small(int n, int m, int mp, double alpha) {
  if (std::abs(m) > n || std::abs(mp) > n) throw std::out_of_range("wigner_d_small: |m|,|m'| <= n");
  const int k = n - std::max(std::abs(m), std::abs(mp));
  const int a = std::abs(m - mp);
  const int b = std::abs(m + mp);
  return std::pow(std::sin(alpha / 2), a) * std::pow(std::cos(alpha / 2), b) *
         tensors::jacobi_scalar(k, a, b, std::cos(alpha));
}

std::complex<double> wigner_D(int n, int m, int mp, const so3::EulerAngles& e) {
  const std::complex<double> i(0.0, 1.0);
  return std::exp(-i * static_cast<double>(m) * e.beta) * wigner_d_small(n, m, mp, e.alpha) *
         std::exp(-i * static_cast<double>(mp) * e.gamma);
}

int numeric_rank(const std::vector<std::vector<double>>& rows, double rel_tol) {
  if (rows.empty()) return 0;
  Eigen::MatrixXd a(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++rank;
  return rank;
}

std::vector<std::vector<double>> gram_matrix(const TensorSpace& s) {
  std::vector<std::vector<double>> g(s.dimension(), std::vector<double>(s.dimension()));
  for (int i = 0; i < s.dimension(); ++i)
    for (int j = 0; j < s.dimension(); ++j) g[i][j] = tensors::dot(s.basis[i], s.basis[j]);
  return g;
}

TensorSpace orthonormalized(const TensorSpace& s) {
  TensorSpace out;
  out.order = s.order;
  out.label = s.label + ":orthonormal";
  for (const auto& b : s.basis) {
    TensorD v = b;
    for (const auto& e : out.basis) v -= tensors::dot(v, e) * e;
    const double nrm = std::sqrt(tensors::norm_squared(v));
    if (nrm < 1e-13) throw std::runtime_error("orthonormalized: dependent basis member");
    out.basis.push_back((1.0 / nrm) * v);
  }
  return out;
}

double max_principal_angle(const TensorSpace& a, const TensorSpace& b) {
  if (a.dimension() == 0 && b.dimension() == 0) return 0.0;
  if (a.dimension() != b.dimension()) return std::acos(-1.0) / 2;
  // Sine-based formula: asin ||(I - Qa Qa^T) Qb||_2 stays accurate for
  // nearly identical spans where the cosine route loses half the digits.
  auto thin_q = [](const TensorSpace& s) {
    Eigen::MatrixXd m = coord_matrix(s);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return q;
  };
  const Eigen::MatrixXd qa = thin_q(a);
  const Eigen::MatrixXd qb = thin_q(b);
  const Eigen::MatrixXd defect = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(defect);
  const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  return std::asin(std::clamp(smax, 0.0, 1.0));
}

TensorQ traceless_project_exact(const TensorQ& u) {
  const int n = u.order();
  if (n <= 1) return u;
  TensorQ out(n);
  for (int i = 0; i < u.size(); ++i) {
    if (u[i].is_zero()) continue;
    const Multiset m = tensors::multiset_at(n, i);
    const Rational c = u[i] * Rational(tensors::multiplicity(m));
    out += c * monomial_traceless(m.k1, m.k2, m.k3);
  }
  return out;
}

}  // namespace anisotens::bases

namespace anisotens::tensors {

TensorQ traceless_project(const TensorQ& u) { return bases::traceless_project_exact(u); }

TensorD traceless_project(const TensorD& u) {
  const int n = u.order();
  if (n <= 1) return u;
  TensorD out(n);
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    const Multiset m = multiset_at(n, i);
    const double c = u[i] * static_cast<double>(multiplicity(m));
    out += c * to_double(bases::monomial_traceless(m.k1, m.k2, m.k3));
  }
  return out;
}

}  // namespace anisotens::tensors
