#include "anisotens/point_groups.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace anisotens::groups {

using bases::TensorSpaceQ;
using tensors::MPoly;
using tensors::TensorQ;

namespace {

constexpr double kDedupTol = 1e-9;
constexpr double kRankTol = 1e-9;

bool contains(const std::vector<so3::Rotation>& set, const so3::Rotation& r) {
  for (const auto& s : set)
    if (so3::frobenius_distance(s, r) < kDedupTol) return true;
  return false;
}

}  // namespace

std::string PointGroup::label() const {
  switch (kind) {
    case GroupKind::Cn: return "C" + std::to_string(n);
    case GroupKind::Dn: return "D" + std::to_string(n);
    case GroupKind::Cinf: return "Cinf";
    case GroupKind::Dinf: return "Dinf";
    case GroupKind::Tetrahedral: return "T";
    case GroupKind::Octahedral: return "O";
    case GroupKind::Icosahedral: return "I";
  }
  return "?";
}

std::vector<so3::Rotation> generator_closure(const std::vector<so3::Rotation>& generators,
                                             std::size_t max_elements) {
  std::vector<so3::Rotation> elems{so3::Rotation::identity()};
  for (const auto& g : generators)
    if (!contains(elems, g)) elems.push_back(g);
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t count = elems.size();
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < count; ++j) {
        const so3::Rotation p = so3::compose(elems[i], elems[j]);
        if (!contains(elems, p)) {
          elems.push_back(p);
          grew = true;
          if (elems.size() > max_elements)
            throw std::runtime_error("generator_closure: closure exceeds element bound");
        }
      }
    }
  }
  return elems;
}

PointGroup build_group(GroupKind kind, int n) {
  PointGroup g;
  g.kind = kind;
  g.n = n;
  const double two_pi = 2.0 * std::numbers::pi;
  switch (kind) {
    case GroupKind::Cn:
      if (n < 1) throw std::domain_error("build_group: Cn needs n >= 1");
      g.elements = generator_closure({so3::j_theta(two_pi / n)});
      break;
    case GroupKind::Dn:
      if (n < 1) throw std::domain_error("build_group: Dn needs n >= 1");
      g.elements = generator_closure({so3::j_theta(two_pi / n), so3::b2()});
      break;
    case GroupKind::Cinf:
    case GroupKind::Dinf:
      g.n = 0;
      break;
    case GroupKind::Tetrahedral:
      g.n = 0;
      g.elements = generator_closure({so3::j_theta(std::numbers::pi), so3::b2(), so3::r3()});
      break;
    case GroupKind::Octahedral:
      g.n = 0;
      g.elements = generator_closure({so3::j_theta(std::numbers::pi / 2), so3::b2(), so3::r3()});
      break;
    case GroupKind::Icosahedral:
      g.n = 0;
      g.elements = generator_closure(
          {so3::j_theta(std::numbers::pi), so3::b2(), so3::r3(), so3::v5()});
      break;
  }
  return g;
}

PointGroup parse_group(const std::string& label) {
  if (label == "Cinf") return build_group(GroupKind::Cinf);
  if (label == "Dinf") return build_group(GroupKind::Dinf);
  if (label == "T") return build_group(GroupKind::Tetrahedral);
  if (label == "O") return build_group(GroupKind::Octahedral);
  if (label == "I") return build_group(GroupKind::Icosahedral);
  if (label.size() >= 2 && (label[0] == 'C' || label[0] == 'D')) {
    const int n = std::stoi(label.substr(1));
    return build_group(label[0] == 'C' ? GroupKind::Cn : GroupKind::Dn, n);
  }
  throw std::invalid_argument("parse_group: unknown group label " + label);
}

TensorD reynolds_average(const TensorD& x, const PointGroup& g) {
  if (g.finite()) {
    TensorD acc(x.order());
    for (const auto& s : g.elements) acc += tensors::rotate(s, x);
    return (1.0 / static_cast<double>(g.elements.size())) * acc;
  }
  // Axisymmetric groups: the invariant content of any order is the axial
  // Legendre-type member (first axis), present for Dinf only at even order.
  const int n = x.order();
  if (n == 0) return x;
  if (g.kind == GroupKind::Dinf && n % 2 == 1) return TensorD(n);
  const TensorSpace& basis = bases::orthogonal_basis(n);
  const TensorD& axial = basis.basis[bases::axial_member_index(n)];
  const double c = tensors::dot(x, axial) / tensors::norm_squared(axial);
  return c * axial;
}

namespace {

TensorSpace span_from_coefficients(const Eigen::MatrixXd& images_cols, const TensorSpace& frame,
                                   const std::string& label) {
  // Columns hold coordinates of averaged images in an orthonormalized
  // basis; an SVD picks the span with the 1e-9 relative rank rule.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(images_cols, Eigen::ComputeThinU);
  const auto& sing = svd.singularValues();
  TensorSpace out;
  out.order = frame.order;
  out.label = label;
  if (sing.size() == 0 || sing[0] == 0.0) return out;
  // The inputs are orthonormal, so genuine invariant content has unit
  // scale; an absolute floor keeps pure roundoff from acquiring rank.
  const double cutoff = std::max(kRankTol * sing[0], 1e-12);
  for (int i = 0; i < sing.size(); ++i) {
    if (sing[i] <= cutoff) break;
    TensorD member(frame.order);
    for (int r = 0; r < frame.dimension(); ++r) member += svd.matrixU()(r, i) * frame.basis[r];
    out.basis.push_back(member);
  }
  return out;
}

}  // namespace

InvariantSpace invariant_space_numeric(const PointGroup& g, int order) {
  if (order < 0) throw std::domain_error("invariant_space_numeric: negative order");
  const TensorSpace frame = bases::orthonormalized(bases::orthogonal_basis(order));
  Eigen::MatrixXd cols(frame.dimension(), frame.dimension());
  for (int j = 0; j < frame.dimension(); ++j) {
    const TensorD avg = reynolds_average(frame.basis[j], g);
    for (int i = 0; i < frame.dimension(); ++i) cols(i, j) = tensors::dot(avg, frame.basis[i]);
  }
  InvariantSpace out;
  out.group = g.label();
  out.order = order;
  out.space = span_from_coefficients(cols, frame, "invariant:" + g.label() + ":numeric");
  return out;
}

namespace {

void append_axial_members(TensorSpaceQ& space, int l, int n, bool dihedral) {
  // Invariant selections from the orthogonal family: Chebyshev index jn,
  // with the dihedral flip forcing l-jn even (T members) or odd (U members).
  const MPoly y1 = MPoly::e1(), y2 = MPoly::e2(), y3 = MPoly::e3(), id = MPoly::ident();
  const MPoly z2 = id - y1 * y1;
  for (int j = 0; j * n <= l; ++j) {
    const int k = l - j * n;
    if (!dihedral || (l - j * n) % 2 == 0)
      space.basis.push_back(
          (tensors::jacobi_monic(k, l, y1, id) * tensors::chebyshev_t(j * n, y2, z2)).tensor());
    if (j >= 1 && (!dihedral || (l - j * n) % 2 == 1))
      space.basis.push_back(
          (tensors::jacobi_monic(k, l, y1, id) * tensors::chebyshev_u(j * n - 1, y2, z2) * y3)
              .tensor());
  }
}

/// Spanning polynomials of the tetrahedral family at order l; the
/// octahedral subfamily keeps even j2 in the first list and odd in the second.
void append_polyhedral_members(TensorSpaceQ& space, int l, bool octahedral) {
  const MPoly y1 = MPoly::e1(), y2 = MPoly::e2(), y3 = MPoly::e3();
  const MPoly s1 = y1 * y1 * (y2 * y2) + y2 * y2 * (y3 * y3) + y3 * y3 * (y1 * y1);
  const MPoly prod = y1 * y2 * y3;
  const MPoly diff = (y1 * y1 - y2 * y2) * (y2 * y2 - y3 * y3) * (y3 * y3 - y1 * y1);
  for (int j2 = 0; 3 * j2 <= l; ++j2) {
    if (octahedral && j2 % 2 == 1) continue;
    const int rem = l - 3 * j2;
    if (rem % 4 != 0) continue;
    const int j1 = rem / 4;
    space.basis.push_back(
        tensors::traceless_project((s1.pow(j1) * prod.pow(j2)).tensor()));
  }
  for (int j2 = 0; 6 + 3 * j2 <= l; ++j2) {
    if (octahedral && j2 % 2 == 0) continue;
    const int rem = l - 6 - 3 * j2;
    if (rem % 4 != 0) continue;
    const int j1 = rem / 4;
    space.basis.push_back(
        tensors::traceless_project((diff * s1.pow(j1) * prod.pow(j2)).tensor()));
  }
}

TensorSpace icosahedral_space(int l) {
  // Filter the tetrahedral space by invariance under the five-fold
  // generator: fixed vectors of the rotation action restricted to the span.
  TensorSpaceQ tetra;
  tetra.order = l;
  append_polyhedral_members(tetra, l, false);
  TensorSpace out;
  out.order = l;
  out.label = "invariant:I";
  if (tetra.basis.empty()) return out;

  const TensorSpace frame = bases::orthonormalized(bases::to_double(tetra));
  const so3::Rotation v = so3::v5();
  const int d = frame.dimension();
  Eigen::MatrixXd m(d, d);
  for (int j = 0; j < d; ++j) {
    const TensorD rotated = tensors::rotate(v, frame.basis[j]);
    for (int i = 0; i < d; ++i) m(i, j) = tensors::dot(rotated, frame.basis[i]);
  }
  // Residual of (R - I)c = 0 must vanish including the part of Rc outside
  // the span; account for it through the norm defect of the projection.
  Eigen::MatrixXd a = m - Eigen::MatrixXd::Identity(d, d);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sing = svd.singularValues();
  for (int i = d - 1; i >= 0; --i) {
    if (sing[i] > 1e-9 * std::max(1.0, sing[0])) break;
    const Eigen::VectorXd c = svd.matrixV().col(i);
    TensorD member(l);
    for (int r = 0; r < d; ++r) member += c[r] * frame.basis[r];
    // Verify the candidate really is fixed (projection defect included).
    const TensorD rotated = tensors::rotate(v, member);
    TensorD diff = rotated - member;
    if (std::sqrt(tensors::norm_squared(diff)) < 1e-9) out.basis.push_back(member);
  }
  return out;
}

}  // namespace

InvariantSpace invariant_space_analytic(const PointGroup& g, int order) {
  if (order < 0) throw std::domain_error("invariant_space_analytic: negative order");
  InvariantSpace out;
  out.group = g.label();
  out.order = order;
  if (order == 0) {
    out.space.order = 0;
    out.space.label = "invariant:" + g.label();
    TensorD one(0);
    one[0] = 1.0;
    out.space.basis.push_back(one);
    return out;
  }
  TensorSpaceQ exact;
  exact.order = order;
  switch (g.kind) {
    case GroupKind::Cn:
      append_axial_members(exact, order, g.n, false);
      break;
    case GroupKind::Dn:
      append_axial_members(exact, order, g.n, true);
      break;
    case GroupKind::Cinf: {
      const MPoly y1 = MPoly::e1(), id = MPoly::ident();
      exact.basis.push_back(tensors::jacobi_monic(order, order, y1, id).tensor());
      break;
    }
    case GroupKind::Dinf: {
      if (order % 2 == 0) {
        const MPoly y1 = MPoly::e1(), id = MPoly::ident();
        exact.basis.push_back(tensors::jacobi_monic(order, order, y1, id).tensor());
      }
      break;
    }
    case GroupKind::Tetrahedral:
      append_polyhedral_members(exact, order, false);
      break;
    case GroupKind::Octahedral:
      append_polyhedral_members(exact, order, true);
      break;
    case GroupKind::Icosahedral: {
      out.space = icosahedral_space(order);
      out.space.label = "invariant:I";
      return out;
    }
  }
  out.space = bases::to_double(exact);
  out.space.label = "invariant:" + g.label();
  return out;
}

namespace {

bool elements_within(const std::vector<so3::Rotation>& h, const std::vector<so3::Rotation>& g) {
  for (const auto& e : h)
    if (!contains(g, e)) return false;
  return true;
}

bool axial_about_first_axis(const so3::Rotation& r) {
  return std::abs(r(0, 0) - 1.0) < kDedupTol && std::abs(r(1, 0)) < kDedupTol &&
         std::abs(r(2, 0)) < kDedupTol && std::abs(r(0, 1)) < kDedupTol &&
         std::abs(r(0, 2)) < kDedupTol;
}

bool flip_of_first_axis(const so3::Rotation& r) {
  // A two-fold rotation about some axis orthogonal to the first body axis.
  if (std::abs(r(0, 0) + 1.0) > kDedupTol) return false;
  const so3::Rotation sq = so3::compose(r, r);
  return so3::frobenius_distance(sq, so3::Rotation::identity()) < 1e-8;
}

}  // namespace

const so3::Rotation& three_fold_frame() {
  static const so3::Rotation q = [] {
    const double s3 = 1.0 / std::sqrt(3.0), s2 = 1.0 / std::sqrt(2.0), s6 = 1.0 / std::sqrt(6.0);
    return so3::Rotation::from_array({s3, s2, s6, s3, -s2, s6, s3, 0.0, -2.0 * s6});
  }();
  return q;
}

bool is_subgroup(const PointGroup& h, const PointGroup& g) {
  if (!h.finite()) {
    if (h.kind == GroupKind::Cinf) return g.kind == GroupKind::Cinf || g.kind == GroupKind::Dinf;
    return g.kind == GroupKind::Dinf;
  }
  if (!g.finite()) {
    const bool need_flips = (h.kind == GroupKind::Dn) || h.kind == GroupKind::Tetrahedral ||
                            h.kind == GroupKind::Octahedral || h.kind == GroupKind::Icosahedral;
    if (g.kind == GroupKind::Cinf && need_flips) return false;
    for (const auto& e : h.elements) {
      if (axial_about_first_axis(e)) continue;
      if (g.kind == GroupKind::Dinf && flip_of_first_axis(e)) continue;
      return false;
    }
    return true;
  }
  if (elements_within(h.elements, g.elements)) return true;
  // Axial subgroups of the polyhedral groups with a three-fold axis live in
  // the rotated frame; conjugate and retry.
  if (g.kind == GroupKind::Tetrahedral || g.kind == GroupKind::Octahedral ||
      g.kind == GroupKind::Icosahedral) {
    const so3::Rotation& q = three_fold_frame();
    std::vector<so3::Rotation> conj;
    conj.reserve(h.elements.size());
    for (const auto& e : h.elements)
      conj.push_back(so3::compose(so3::compose(q, e), q.transposed()));
    if (elements_within(conj, g.elements)) return true;
  }
  return false;
}

}  // namespace anisotens::groups
