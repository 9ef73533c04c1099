#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace anisotens::so3 {

using Vec3 = std::array<double, 3>;

/// Proper rotation stored as a row-major 3x3 direction-cosine matrix.
/// Column j is the j-th body axis expressed in the reference frame.
/// Construction validates orthonormality and det = +1 to 1e-12.
class Rotation {
 public:
  Rotation();  // identity

  static Rotation identity() { return Rotation(); }
  static Rotation from_array(const std::array<double, 9>& row_major);
  /// Skips the validity check; for matrices known exact by construction.
  static Rotation from_array_unchecked(const std::array<double, 9>& row_major);

  double operator()(int i, int j) const { return m_[3 * i + j]; }
  const std::array<double, 9>& data() const { return m_; }

  Vec3 column(int j) const { return {m_[j], m_[3 + j], m_[6 + j]}; }
  Vec3 apply(const Vec3& v) const;

  Rotation transposed() const;
  Rotation inverse() const { return transposed(); }

  /// Largest absolute violation of R^T R = I and det R = 1.
  double orthonormality_defect() const;

 private:
  explicit Rotation(const std::array<double, 9>& m) : m_(m) {}
  std::array<double, 9> m_;
};

Rotation compose(const Rotation& a, const Rotation& b);
double frobenius_distance(const Rotation& a, const Rotation& b);

/// Angles of the Euler chart used throughout: alpha in [0,pi],
/// beta and gamma in [0,2pi). Out-of-range values throw.
struct EulerAngles {
  double alpha;
  double beta;
  double gamma;
  EulerAngles(double a, double b, double g);
};

struct Quaternion {
  double a, b, c, d;
  double norm() const;
};

Rotation rotation_from_euler(const EulerAngles& angles);

/// Inverse chart. On the degenerate set |sin(alpha)| < 1e-9 only the
/// combination beta+gamma (alpha=0) or beta-gamma (alpha=pi) is defined;
/// it is returned in beta with gamma set to 0.
EulerAngles euler_from_rotation(const Rotation& r);

/// Unit quaternion to rotation; q and -q map to the same matrix.
/// Throws if |a^2+b^2+c^2+d^2 - 1| > 1e-6, renormalizes smaller defects.
Rotation rotation_from_quaternion(const Quaternion& q);

/// Rotation about the first body axis by theta.
Rotation j_theta(double theta);
/// Two-fold rotation about the second body axis: diag(-1, 1, -1).
Rotation b2();
/// Cyclic frame permutation (m1,m2,m3) -> (m2,m3,m1).
Rotation r3();
/// Five-fold icosahedral rotation with the golden ratio entries.
Rotation v5();

struct StandardGenerators {
  std::function<Rotation(double)> j_theta;
  Rotation b2;
  Rotation r3;
  Rotation v5;
};
StandardGenerators standard_generators();

/// Normalized Haar quadrature node set.
struct QuadratureGrid {
  struct Node {
    Rotation p;
    double weight;
  };
  std::vector<Node> nodes;
  int exactness_order = 0;
};

/// Product grid exact for polynomials of degree <= 2*max_order in the
/// matrix entries: Gauss-Legendre in cos(alpha), uniform in beta and gamma.
QuadratureGrid haar_grid(int max_order);

/// Weighted sum over the grid with a fixed pairwise reduction order.
double integrate(const std::function<double(const Rotation&)>& f, const QuadratureGrid& grid);

/// Pairwise-deterministic sum of a precomputed value array.
double pairwise_sum(const std::vector<double>& values);

/// Gauss-Legendre nodes/weights on [-1,1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace anisotens::so3
