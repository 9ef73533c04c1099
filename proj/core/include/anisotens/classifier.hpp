#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anisotens/point_groups.hpp"
#include "anisotens/so3.hpp"
#include "anisotens/sym_tensor.hpp"

namespace anisotens::classifier {

using tensors::TensorD;

/// The order-parameter tensors handled by the classifier.
enum class OrderParam { Q1, Q2, M2, T3, Q4 };

std::string to_string(OrderParam p);
OrderParam order_param_from_string(const std::string& name);
int order_of(OrderParam p);

/// Molecular base tensor whose orientation average defines the parameter:
/// Q1: m1,  Q2: m1^2 - i/3,  M2: m2^2 - (i - m1^2)/2,
/// T3: 2 m1 m2 m3,  Q4: (m1^4)_0.
const TensorD& base_tensor(OrderParam p);

struct OrderParameterSet {
  std::map<OrderParam, TensorD> tensors;
  std::string molecular_group;  // optional label, e.g. "D2"

  double total_norm2() const;
  std::vector<OrderParam> selection() const;
};

/// Coefficients of each tensor in its frame-q slot basis, using the slot
/// names d1..d3, a1..a5 (Q2), a1'..a5' (M2), b1..b7, c1..c9.
struct CoefficientVector {
  so3::Rotation frame;
  std::map<OrderParam, std::vector<double>> coeffs;
};

/// Slot names of one kind in slot order.
const std::vector<std::string>& slot_names(OrderParam p);
/// Slot tensors of one kind in the reference frame, in slot order.
const bases::TensorSpace& slot_space(OrderParam p);

CoefficientVector decompose_in_frame(const OrderParameterSet& tensors, const so3::Rotation& q);
OrderParameterSet reassemble(const CoefficientVector& coeffs);

struct FrameFit {
  so3::Rotation frame;
  double residual;  // squared distance after the joint minimization
};

/// Joint minimization over SO(3) frames with closed-form projections onto
/// the rotated invariant spaces; deterministic multistart.
FrameFit frame_align(const OrderParameterSet& tensors, const groups::PointGroup& h);

struct DetectOptions {
  double tol = 1e-8;
  bool relative = true;  // accept residual <= tol * sum ||U_j||^2
};

struct SymmetryReport {
  std::string detected;  // group label, "isotropic", or "none"
  so3::Rotation frame;
  CoefficientVector coefficients;
  std::map<std::string, double> distances;
  DetectOptions tolerance;
};

/// Candidate mesoscopic groups for tensors of order <= 4 (no five-fold or
/// icosahedral symmetry is distinguishable at these orders).
const std::vector<std::string>& candidate_groups();

SymmetryReport detect_symmetry(const OrderParameterSet& tensors, const DetectOptions& opts = {});

/// Residual of frame_align for every candidate group.
std::map<std::string, double> distance_profile(const OrderParameterSet& tensors);

struct Canonicalized {
  CoefficientVector coeffs;
  double angle = 0.0;        // in-plane rotation applied about the first axis
  std::string zeroed_slot;   // name of the U-family member driven to zero
};

/// Rotates the frame about its first axis so that the U member of the
/// (T,U) Chebyshev pair with the given index vanishes; the paired T member
/// picks up the full pair magnitude.
Canonicalized canonicalize_axial_frame(const CoefficientVector& coeffs, OrderParam kind,
                                       int cheb_index);

struct BreakingGraph {
  struct Node {
    std::string group;
    std::vector<std::string> free_coefficients;
    std::vector<std::string> constraints;
    // Description in the three-fold frame, when it differs (T and O).
    std::vector<std::string> alt_free_coefficients;
    std::vector<std::string> alt_constraints;
  };
  struct Edge {
    std::string from;
    std::string to;
    std::vector<std::string> freed_coefficients;
    std::vector<std::string> dropped_constraints;
  };
  std::vector<Node> nodes;  // includes "isotropic"
  std::vector<Edge> edges;  // from a group to each maximal distinguishable subgroup

  const Node* find(const std::string& group) const;
  bool has_edge(const std::string& from, const std::string& to) const;
};

/// Distinguishable mesoscopic groups and minimal symmetry-breaking
/// transitions for the given tensor selection. Nodes are computed by
/// invariant-space comparison plus frame-freedom subsumption, not from a
/// hard-coded list.
BreakingGraph breaking_graph(const std::string& molecular_group,
                             const std::vector<OrderParam>& selection);

}  // namespace anisotens::classifier
