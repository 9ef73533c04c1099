#include "anisotens/so3.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace anisotens::so3 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOrthoTol = 1e-12;

double wrap_2pi(double x) {
  double y = std::fmod(x, 2.0 * kPi);
  if (y < 0) y += 2.0 * kPi;
  if (y >= 2.0 * kPi) y = 0.0;
  return y;
}

}  // namespace

Rotation::Rotation() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

double Rotation::orthonormality_defect() const {
  const auto& m = m_;
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double g = 0.0;
      for (int k = 0; k < 3; ++k) g += m[3 * k + i] * m[3 * k + j];
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
  return std::max(worst, std::abs(det - 1.0));
}

Rotation Rotation::from_array(const std::array<double, 9>& row_major) {
  Rotation r(row_major);
  if (r.orthonormality_defect() > kOrthoTol)
    throw std::invalid_argument("Rotation: matrix is not orthonormal with det +1");
  return r;
}

Rotation Rotation::from_array_unchecked(const std::array<double, 9>& row_major) {
  return Rotation(row_major);
}

Vec3 Rotation::apply(const Vec3& v) const {
  Vec3 out{};
  for (int i = 0; i < 3; ++i)
    out[i] = m_[3 * i] * v[0] + m_[3 * i + 1] * v[1] + m_[3 * i + 2] * v[2];
  return out;
}

Rotation Rotation::transposed() const {
  return Rotation({m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]});
}

Rotation compose(const Rotation& a, const Rotation& b) {
  std::array<double, 9> p{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      p[3 * i + j] = s;
    }
  return Rotation::from_array(p);
}

double frobenius_distance(const Rotation& a, const Rotation& b) {
  double s = 0.0;
  for (int i = 0; i < 9; ++i) {
    double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

EulerAngles::EulerAngles(double a, double b, double g) : alpha(a), beta(b), gamma(g) {
  constexpr double slack = 1e-9;
  if (alpha < -slack || alpha > kPi + slack) throw std::domain_error("EulerAngles: alpha outside [0,pi]");
  if (beta < -slack || beta >= 2.0 * kPi + slack) throw std::domain_error("EulerAngles: beta outside [0,2pi)");
  if (gamma < -slack || gamma >= 2.0 * kPi + slack) throw std::domain_error("EulerAngles: gamma outside [0,2pi)");
  alpha = std::clamp(alpha, 0.0, kPi);
  beta = wrap_2pi(beta);
  gamma = wrap_2pi(gamma);
}

Rotation rotation_from_euler(const EulerAngles& e) {
  const double ca = std::cos(e.alpha), sa = std::sin(e.alpha);
  const double cb = std::cos(e.beta), sb = std::sin(e.beta);
  const double cg = std::cos(e.gamma), sg = std::sin(e.gamma);
  return Rotation::from_array({
      ca, -sa * cg, sa * sg,
      sa * cb, ca * cb * cg - sb * sg, -ca * cb * sg - sb * cg,
      sa * sb, ca * sb * cg + cb * sg, -ca * sb * sg + cb * cg,
  });
}

EulerAngles euler_from_rotation(const Rotation& r) {
  const double ca = std::clamp(r(0, 0), -1.0, 1.0);
  const double alpha = std::acos(ca);
  const double sa = std::sin(alpha);
  if (sa >= 1e-9) {
    // First row gives gamma, first column gives beta.
    double gamma = std::atan2(r(0, 2), -r(0, 1));
    double beta = std::atan2(r(2, 0), r(1, 0));
    return EulerAngles(alpha, wrap_2pi(beta), wrap_2pi(gamma));
  }
  if (ca > 0) {
    // alpha = 0: only beta + gamma is determined.
    double combo = std::atan2(r(2, 1), r(1, 1));
    return EulerAngles(0.0, wrap_2pi(combo), 0.0);
  }
  // alpha = pi: only beta - gamma is determined.
  double combo = std::atan2(-r(2, 1), -r(1, 1));
  return EulerAngles(kPi, wrap_2pi(combo), 0.0);
}

double Quaternion::norm() const { return std::sqrt(a * a + b * b + c * c + d * d); }

Rotation rotation_from_quaternion(const Quaternion& q) {
  const double n2 = q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d;
  if (std::abs(n2 - 1.0) > 1e-6)
    throw std::invalid_argument("rotation_from_quaternion: quaternion is not unit length");
  const double s = 1.0 / std::sqrt(n2);
  const double a = q.a * s, b = q.b * s, c = q.c * s, d = q.d * s;
  return Rotation::from_array({
      a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (a * c + b * d),
      2 * (a * d + b * c), a * a - b * b + c * c - d * d, 2 * (c * d - a * b),
      2 * (b * d - a * c), 2 * (a * b + c * d), a * a - b * b - c * c + d * d,
  });
}

Rotation j_theta(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return Rotation::from_array({1, 0, 0, 0, c, -s, 0, s, c});
}

Rotation b2() { return Rotation::from_array({-1, 0, 0, 0, 1, 0, 0, 0, -1}); }

Rotation r3() { return Rotation::from_array({0, 0, 1, 1, 0, 0, 0, 1, 0}); }

Rotation v5() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  return Rotation::from_array({
      phi / 2, -0.5, (phi - 1) / 2,
      0.5, (phi - 1) / 2, -phi / 2,
      (phi - 1) / 2, phi / 2, 0.5,
  });
}

StandardGenerators standard_generators() {
  return StandardGenerators{[](double t) { return j_theta(t); }, b2(), r3(), v5()};
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration from the Chebyshev estimate of the i-th root.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

QuadratureGrid haar_grid(int max_order) {
  if (max_order < 1) throw std::domain_error("haar_grid: max_order must be >= 1");
  const int n_alpha = max_order + 1;
  const int n_circ = 2 * max_order + 1;
  std::vector<double> x, w;
  gauss_legendre(n_alpha, x, w);

  QuadratureGrid grid;
  grid.exactness_order = max_order;
  grid.nodes.reserve(static_cast<std::size_t>(n_alpha) * n_circ * n_circ);
  const double circ_w = 1.0 / n_circ;
  for (int ia = 0; ia < n_alpha; ++ia) {
    const double alpha = std::acos(std::clamp(x[ia], -1.0, 1.0));
    // d(cos a) absorbs the sin(a) of the Haar density; 1/2 normalizes [-1,1].
    const double wa = 0.5 * w[ia];
    for (int ib = 0; ib < n_circ; ++ib) {
      const double beta = 2.0 * kPi * ib / n_circ;
      for (int ig = 0; ig < n_circ; ++ig) {
        const double gamma = 2.0 * kPi * ig / n_circ;
        grid.nodes.push_back(
            {rotation_from_euler(EulerAngles(alpha, beta, gamma)), wa * circ_w * circ_w});
      }
    }
  }
  return grid;
}

double pairwise_sum(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  std::vector<double> acc = values;
  std::size_t n = acc.size();
  while (n > 1) {
    std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < n / 2; ++i) acc[i] = acc[2 * i] + acc[2 * i + 1];
    if (n % 2 == 1) acc[n / 2] = acc[n - 1];
    n = half;
  }
  return acc[0];
}

double integrate(const std::function<double(const Rotation&)>& f, const QuadratureGrid& grid) {
  std::vector<double> terms(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i)
    terms[i] = grid.nodes[i].weight * f(grid.nodes[i].p);
  return pairwise_sum(terms);
}

}  // namespace anisotens::so3
