#pragma once

#include <stdexcept>
#include <vector>

#include "anisotens/point_groups.hpp"
#include "anisotens/so3.hpp"
#include "anisotens/sym_tensor.hpp"

namespace anisotens::maxent {

using tensors::TensorD;

/// One moment constraint: the density must average the rotation orbit of
/// `base` to `target`. Both are symmetric traceless of the same order.
struct MomentTarget {
  TensorD base;
  TensorD target;
};

struct MomentTargets {
  std::vector<MomentTarget> entries;
  int max_order() const;
  /// Throws unless every entry is traceless of matching positive order.
  void validate() const;
};

struct SolverOptions {
  double grad_tol = 1e-9;
  double moment_tol = 1e-8;
  int max_iterations = 500;
  double b_max = 1e3;
  double logz_tol = 1e-10;  // grid refinement stop
  int grid_order = 0;       // 0 = automatic
  int max_grid_order = 60;
  int threads = 1;
};

struct InfeasibleTargetsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what, std::vector<double> res)
      : std::runtime_error(what), residuals(std::move(res)) {}
  std::vector<double> residuals;
};

/// Dual objective J(b) = ln int exp(sum b_js (U_j(p) - W_j) . X_s) dp on a
/// fixed grid; convex, with the exact quadrature gradient.
class DualObjective {
 public:
  DualObjective(const MomentTargets& targets, const so3::QuadratureGrid& grid, int threads = 1);

  int dimension() const { return static_cast<int>(shifts_.size()); }
  double value(const std::vector<double>& b) const;
  double value_and_gradient(const std::vector<double>& b, std::vector<double>& grad) const;
  /// ln Z for the Boltzmann density with these coefficients.
  double log_partition(const std::vector<double>& b) const;
  /// Quadrature moments of every target's orbit under the density for b.
  std::vector<TensorD> moments(const std::vector<double>& b) const;

  const so3::QuadratureGrid& grid() const { return grid_; }

 private:
  std::vector<double> node_exponents(const std::vector<double>& b, bool shifted) const;

  MomentTargets targets_;
  so3::QuadratureGrid grid_;
  std::vector<std::vector<double>> design_;  // node -> flattened (j,s) values
  std::vector<double> shifts_;               // W_j . X_s per flattened slot
  std::vector<int> slot_target_;             // flattened slot -> target index
  std::vector<int> slot_member_;             // flattened slot -> basis member
  std::vector<double> basis_norm2_;          // per flattened slot
  int threads_;
};

struct MaxEntSolution {
  MomentTargets targets;
  std::vector<std::vector<double>> b;  // per target, per orthogonal-basis member
  double log_z = 0.0;
  so3::QuadratureGrid grid;
  std::vector<double> residuals;  // per-target moment error norms
  int iterations = 0;
  double grad_norm = 0.0;

  double density(const so3::Rotation& p) const;
};

/// Quasi-Newton minimization of the dual from b = 0 with automatic grid
/// refinement until the partition value settles below logz_tol.
MaxEntSolution solve_maxent(const MomentTargets& targets, const SolverOptions& opts = {});

/// Max relative deviation |rho(q t q^-1 p) - rho(p)| / max rho over the
/// group elements (continuous groups sampled with `samples` angles) and a
/// fixed deterministic set of test rotations.
double verify_mesoscopic_symmetry(const MaxEntSolution& sol, const groups::PointGroup& h,
                                  const so3::Rotation& frame, int samples = 8);

/// Deterministic pseudo-random rotations (unit quaternion construction).
std::vector<so3::Rotation> test_rotations(int count, unsigned seed);

}  // namespace anisotens::maxent
