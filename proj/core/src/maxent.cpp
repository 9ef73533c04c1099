#include "anisotens/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "anisotens/traceless_bases.hpp"

namespace anisotens::maxent {

int MomentTargets::max_order() const {
  int m = 0;
  for (const auto& e : entries) m = std::max(m, e.base.order());
  return m;
}

void MomentTargets::validate() const {
  if (entries.empty()) throw std::invalid_argument("MomentTargets: empty constraint set");
  for (const auto& e : entries) {
    if (e.base.order() != e.target.order())
      throw std::invalid_argument("MomentTargets: base/target order mismatch");
    if (e.base.order() < 1) throw std::invalid_argument("MomentTargets: order must be >= 1");
    for (const TensorD* t : {&e.base, &e.target}) {
      if (t->order() < 2) continue;
      const TensorD tr = tensors::trace(*t);
      if (std::sqrt(tensors::norm_squared(tr)) > 1e-10)
        throw std::invalid_argument("MomentTargets: tensors must be traceless");
    }
  }
}

DualObjective::DualObjective(const MomentTargets& targets, const so3::QuadratureGrid& grid,
                             int threads)
    : targets_(targets), grid_(grid), threads_(std::max(1, threads)) {
  targets_.validate();
  for (std::size_t j = 0; j < targets_.entries.size(); ++j) {
    const int n = targets_.entries[j].base.order();
    const auto& basis = bases::orthogonal_basis(n);
    for (int s = 0; s < basis.dimension(); ++s) {
      slot_target_.push_back(static_cast<int>(j));
      slot_member_.push_back(s);
      shifts_.push_back(tensors::dot(targets_.entries[j].target, basis.basis[s]));
      basis_norm2_.push_back(tensors::norm_squared(basis.basis[s]));
    }
  }
  design_.assign(grid_.nodes.size(), std::vector<double>(shifts_.size()));
  for (std::size_t r = 0; r < grid_.nodes.size(); ++r) {
    std::size_t col = 0;
    for (const auto& e : targets_.entries) {
      const TensorD rotated = tensors::rotate(grid_.nodes[r].p, e.base);
      const auto& basis = bases::orthogonal_basis(e.base.order());
      for (int s = 0; s < basis.dimension(); ++s)
        design_[r][col++] = tensors::dot(rotated, basis.basis[s]);
    }
  }
}

std::vector<double> DualObjective::node_exponents(const std::vector<double>& b,
                                                  bool shifted) const {
  std::vector<double> g(grid_.nodes.size(), 0.0);
  for (std::size_t r = 0; r < g.size(); ++r) {
    double acc = 0.0;
    const auto& row = design_[r];
    for (std::size_t c = 0; c < row.size(); ++c)
      acc += b[c] * (row[c] - (shifted ? shifts_[c] : 0.0));
    g[r] = acc;
  }
  return g;
}

double DualObjective::value(const std::vector<double>& b) const {
  const std::vector<double> g = node_exponents(b, true);
  double gmax = -1e300;
  for (double v : g) gmax = std::max(gmax, v);
  std::vector<double> terms(g.size());
  for (std::size_t r = 0; r < g.size(); ++r)
    terms[r] = grid_.nodes[r].weight * std::exp(g[r] - gmax);
  return gmax + std::log(so3::pairwise_sum(terms));
}

double DualObjective::value_and_gradient(const std::vector<double>& b,
                                         std::vector<double>& grad) const {
  const std::vector<double> g = node_exponents(b, true);
  double gmax = -1e300;
  for (double v : g) gmax = std::max(gmax, v);
  std::vector<double> probs(g.size());
  for (std::size_t r = 0; r < g.size(); ++r)
    probs[r] = grid_.nodes[r].weight * std::exp(g[r] - gmax);
  const double z = so3::pairwise_sum(probs);
  for (auto& p : probs) p /= z;

  grad.assign(shifts_.size(), 0.0);
  std::vector<double> terms(g.size());
  for (std::size_t c = 0; c < shifts_.size(); ++c) {
    for (std::size_t r = 0; r < g.size(); ++r)
      terms[r] = probs[r] * (design_[r][c] - shifts_[c]);
    grad[c] = so3::pairwise_sum(terms);
  }
  return gmax + std::log(z);
}

double DualObjective::log_partition(const std::vector<double>& b) const {
  double shift = 0.0;
  for (std::size_t c = 0; c < shifts_.size(); ++c) shift += b[c] * shifts_[c];
  return value(b) + shift;
}

std::vector<TensorD> DualObjective::moments(const std::vector<double>& b) const {
  const std::vector<double> g = node_exponents(b, false);
  double gmax = -1e300;
  for (double v : g) gmax = std::max(gmax, v);
  std::vector<double> probs(g.size());
  for (std::size_t r = 0; r < g.size(); ++r)
    probs[r] = grid_.nodes[r].weight * std::exp(g[r] - gmax);
  const double z = so3::pairwise_sum(probs);
  for (auto& p : probs) p /= z;

  std::vector<TensorD> out;
  out.reserve(targets_.entries.size());
  std::vector<double> terms(g.size());
  for (std::size_t j = 0; j < targets_.entries.size(); ++j) {
    const int n = targets_.entries[j].base.order();
    const auto& basis = bases::orthogonal_basis(n);
    TensorD m(n);
    for (std::size_t c = 0; c < shifts_.size(); ++c) {
      if (slot_target_[c] != static_cast<int>(j)) continue;
      for (std::size_t r = 0; r < g.size(); ++r) terms[r] = probs[r] * design_[r][c];
      const double coeff = so3::pairwise_sum(terms) / basis_norm2_[c];
      m += coeff * basis.basis[slot_member_[c]];
    }
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

struct BfgsResult {
  std::vector<double> x;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

BfgsResult minimize_bfgs(const DualObjective& obj, std::vector<double> x,
                         const SolverOptions& opts) {
  const int n = obj.dimension();
  std::vector<double> grad(n), grad_new(n);
  double f = obj.value_and_gradient(x, grad);
  std::vector<double> h(static_cast<std::size_t>(n) * n, 0.0);  // inverse Hessian estimate
  for (int i = 0; i < n; ++i) h[i * n + i] = 1.0;

  auto norm2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };

  BfgsResult out;
  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it;
    out.grad_norm = norm2(grad);
    if (out.grad_norm < opts.grad_tol) {
      out.converged = true;
      break;
    }
    for (double xi : x)
      if (std::abs(xi) > opts.b_max) {
        out.diverged = true;
        break;
      }
    if (out.diverged) break;

    std::vector<double> dir(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dir[i] -= h[i * n + j] * grad[j];
    double slope = 0.0;
    for (int i = 0; i < n; ++i) slope += dir[i] * grad[i];
    if (slope >= 0) {  // reset on loss of descent
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) h[i * n + j] = (i == j) ? 1.0 : 0.0;
        dir[i] = -grad[i];
      }
      slope = 0.0;
      for (int i = 0; i < n; ++i) slope += dir[i] * grad[i];
    }

    // Backtracking Armijo with a floor at the function's own resolution:
    // near the optimum the predicted decrease drops below eps*|f| while the
    // quadrature gradient is still accurate, so full quasi-Newton steps
    // remain the right move.
    const double f_eps = 1e-15 * (1.0 + std::abs(f));
    double alpha = 1.0;
    std::vector<double> x_new(n);
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < n; ++i) x_new[i] = x[i] + alpha * dir[i];
      f_new = obj.value(x_new);
      if (f_new <= f + 1e-4 * alpha * slope + f_eps) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no measurable progress left at this precision
    f_new = obj.value_and_gradient(x_new, grad_new);

    std::vector<double> s(n), y(n);
    double sy = 0.0;
    for (int i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = grad_new[i] - grad[i];
      sy += s[i] * y[i];
    }
    if (sy > 1e-14) {
      // BFGS inverse update: H <- (I - s y^T/sy) H (I - y s^T/sy) + s s^T/sy.
      std::vector<double> hy(n, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) hy[i] += h[i * n + j] * y[j];
      double yhy = 0.0;
      for (int i = 0; i < n; ++i) yhy += y[i] * hy[i];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          h[i * n + j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) -
                          (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }
    }
    x = x_new;
    f = f_new;
    grad = grad_new;
  }
  out.x = std::move(x);
  if (!out.converged && !out.diverged) out.grad_norm = norm2(grad);
  return out;
}

}  // namespace

MaxEntSolution solve_maxent(const MomentTargets& targets, const SolverOptions& opts) {
  targets.validate();
  const int base_order = opts.grid_order > 0 ? opts.grid_order
                                             : std::max(6, 3 * targets.max_order());
  int grid_order = base_order;
  so3::QuadratureGrid grid = so3::haar_grid(grid_order);
  auto obj = std::make_unique<DualObjective>(targets, grid, opts.threads);
  std::vector<double> b(obj->dimension(), 0.0);

  BfgsResult res;
  while (true) {
    res = minimize_bfgs(*obj, b, opts);
    if (res.diverged)
      throw InfeasibleTargetsError(
          "solve_maxent: coefficients diverged; targets lie outside or on the moment body "
          "boundary");
    b = res.x;
    if (!res.converged) break;

    // The exponential integrand is not polynomial: refine until ln Z settles.
    if (grid_order >= opts.max_grid_order) break;
    const int next_order = grid_order + 4;
    so3::QuadratureGrid finer = so3::haar_grid(next_order);
    DualObjective refined(targets, finer, opts.threads);
    const double j_here = obj->value(b);
    const double j_finer = refined.value(b);
    if (std::abs(j_here - j_finer) < opts.logz_tol) break;
    grid_order = next_order;
    grid = std::move(finer);
    obj = std::make_unique<DualObjective>(targets, grid, opts.threads);
  }

  MaxEntSolution sol;
  sol.targets = targets;
  sol.grid = grid;
  sol.iterations = res.iterations;
  sol.grad_norm = res.grad_norm;
  sol.log_z = obj->log_partition(b);

  sol.b.resize(targets.entries.size());
  std::size_t col = 0;
  for (std::size_t j = 0; j < targets.entries.size(); ++j) {
    const int n = targets.entries[j].base.order();
    const int dim = 2 * n + 1;
    sol.b[j].assign(b.begin() + col, b.begin() + col + dim);
    col += dim;
  }

  const std::vector<TensorD> mom = obj->moments(b);
  sol.residuals.resize(mom.size());
  double worst = 0.0;
  for (std::size_t j = 0; j < mom.size(); ++j) {
    TensorD diff = mom[j] - targets.entries[j].target;
    sol.residuals[j] = std::sqrt(tensors::norm_squared(diff));
    worst = std::max(worst, sol.residuals[j]);
  }
  if (!res.converged)
    throw ConvergenceError("solve_maxent: no convergence in max_iterations", sol.residuals);
  if (worst > opts.moment_tol)
    throw ConvergenceError("solve_maxent: moments miss their targets", sol.residuals);
  return sol;
}

double MaxEntSolution::density(const so3::Rotation& p) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < targets.entries.size(); ++j) {
    const TensorD rotated = tensors::rotate(p, targets.entries[j].base);
    const auto& basis = bases::orthogonal_basis(targets.entries[j].base.order());
    for (std::size_t s = 0; s < b[j].size(); ++s)
      acc += b[j][s] * tensors::dot(rotated, basis.basis[static_cast<int>(s)]);
  }
  return std::exp(acc - log_z);
}

std::vector<so3::Rotation> test_rotations(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<so3::Rotation> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    double a = gauss(rng), b = gauss(rng), c = gauss(rng), d = gauss(rng);
    const double n = std::sqrt(a * a + b * b + c * c + d * d);
    out.push_back(so3::rotation_from_quaternion({a / n, b / n, c / n, d / n}));
  }
  return out;
}

double verify_mesoscopic_symmetry(const MaxEntSolution& sol, const groups::PointGroup& h,
                                  const so3::Rotation& frame, int samples) {
  std::vector<so3::Rotation> elements;
  if (h.finite()) {
    elements = h.elements;
  } else {
    for (int k = 0; k < samples; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / samples;
      elements.push_back(so3::j_theta(theta));
      if (h.kind == groups::GroupKind::Dinf)
        elements.push_back(so3::compose(so3::b2(), so3::j_theta(theta)));
    }
  }

  const std::vector<so3::Rotation> points = test_rotations(24, 20240u);
  double max_rho = 0.0;
  std::vector<double> rho(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    rho[i] = sol.density(points[i]);
    max_rho = std::max(max_rho, rho[i]);
  }
  double worst = 0.0;
  for (const auto& t : elements) {
    const so3::Rotation conj =
        so3::compose(so3::compose(frame, t), frame.transposed());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double moved = sol.density(so3::compose(conj, points[i]));
      worst = std::max(worst, std::abs(moved - rho[i]));
    }
  }
  return max_rho > 0 ? worst / max_rho : 0.0;
}

}  // namespace anisotens::maxent
