#pragma once

#include <string>
#include <vector>

#include "anisotens/so3.hpp"
#include "anisotens/sym_tensor.hpp"
#include "anisotens/traceless_bases.hpp"

namespace anisotens::groups {

using bases::TensorSpace;
using tensors::TensorD;

enum class GroupKind { Cn, Dn, Cinf, Dinf, Tetrahedral, Octahedral, Icosahedral };

/// Rotational point group in the fixed frame conventions: the n-fold axis
/// is the first body axis, the secondary two-fold axis (dihedral groups)
/// the second; polyhedral groups follow the vertex/edge conventions of the
/// generator set.
struct PointGroup {
  GroupKind kind = GroupKind::Cn;
  int n = 1;  // meaningful for Cn/Dn
  std::vector<so3::Rotation> elements;  // empty for the continuous groups

  bool finite() const { return kind != GroupKind::Cinf && kind != GroupKind::Dinf; }
  std::size_t order() const { return elements.size(); }
  std::string label() const;
};

PointGroup build_group(GroupKind kind, int n = 0);
PointGroup parse_group(const std::string& label);

/// Closure of a generating set under composition, deduplicated at 1e-9
/// Frobenius distance. Throws if the closure does not stabilize.
std::vector<so3::Rotation> generator_closure(const std::vector<so3::Rotation>& generators,
                                             std::size_t max_elements = 512);

/// Group average (1/|G|) sum_s rotate(s, X); continuous groups use the
/// closed-form projection onto the axial component instead of sampling.
TensorD reynolds_average(const TensorD& x, const PointGroup& g);

struct InvariantSpace {
  std::string group;
  int order = 0;
  TensorSpace space;
  int dimension() const { return space.dimension(); }
};

/// Invariant tensors found by averaging the orthogonal basis and ranking
/// the images by SVD (relative threshold 1e-9).
InvariantSpace invariant_space_numeric(const PointGroup& g, int order);

/// Invariant tensors from the closed-form families: Jacobi*Chebyshev
/// selections for the axial groups, polynomial families for the
/// tetrahedral/octahedral groups, and the five-fold filter for the
/// icosahedral group.
InvariantSpace invariant_space_analytic(const PointGroup& g, int order);

/// Subgroup test honoring the frame conventions, including the three-fold
/// frame embedding of C3 into T and D3 into O.
bool is_subgroup(const PointGroup& h, const PointGroup& g);

/// Change of frame aligning the first axis with the polyhedral three-fold
/// axis (columns (1,1,1)/sqrt3, (1,-1,0)/sqrt2, (1,1,-2)/sqrt6).
const so3::Rotation& three_fold_frame();

}  // namespace anisotens::groups
