#pragma once

#include <complex>
#include <string>
#include <vector>

#include "anisotens/sym_tensor.hpp"
#include "anisotens/tensor_poly.hpp"

namespace anisotens::bases {

using tensors::TensorD;
using tensors::TensorQ;

/// Ordered list of symmetric tensors spanning a subspace.
template <class T>
struct TensorSpaceT {
  int order = 0;
  std::vector<tensors::SymTensor<T>> basis;
  std::string label;
  int dimension() const { return static_cast<int>(basis.size()); }
};

using TensorSpace = TensorSpaceT<double>;
using TensorSpaceQ = TensorSpaceT<Rational>;

TensorSpace to_double(const TensorSpaceQ& s);

/// Traceless tensor generated by the monomial e1^k1 e2^k2 e3^k3.
/// For k3 <= 1 the i-correction coefficients are
///   a_{j1,j2} = (-1)^{j1+j2} binom(j1+j2, j1)
///               k1! k2! (2n-1-2j1-2j2)!! / ((k1-2j1)! (k2-2j2)! (2n-1)!! (2j1+2j2)!!),
/// and higher k3 reduces through e3^2 -> -e1^2 - e2^2. Exact and cached.
const TensorQ& monomial_traceless(int k1, int k2, int k3);

/// Same tensor as a polynomial in (e1,e2,e3,i); term-level form used by the
/// exact Laplacian checks.
tensors::MPoly monomial_traceless_poly(int k1, int k2, int k3);
/// Polynomial form of one orthogonal-basis member.
tensors::MPoly orthogonal_member_poly(int order, int member);

/// The 2n+1 tensors (e1^k1 e2^k2 e3^k3)_0 with k3 in {0,1}, ordered by k3
/// then k1 descending.
const TensorSpaceQ& monomial_basis_exact(int n);
const TensorSpace& monomial_basis(int n);

/// Pairwise-orthogonal basis built from Jacobi-monic prefactors and
/// Chebyshev tensor polynomials:
///   P^_k(e1,i) T~_{n-k}(e2, i-e1^2),        k = n..0,
///   P^_k(e1,i) U~_{n-k-1}(e2, i-e1^2) e3,   k = n-1..0.
/// Each member's leading e1^k e2^.. coefficient is the plain Chebyshev one,
/// so the low orders read q1, q1^2 - i/3, 2 q2 q3, ... directly.
const TensorSpaceQ& orthogonal_basis_exact(int n);
const TensorSpace& orthogonal_basis(int n);

/// Index of the axial member (e1^n)_0 inside orthogonal_basis(n).
inline int axial_member_index(int /*n*/) { return 0; }

/// Member count n+1 (T family) + n (U family).
struct OrthogonalSlot {
  bool u_family;    // false: Chebyshev-T member, true: Chebyshev-U member
  int jacobi_index; // k
  int cheb_index;   // n - k
};
OrthogonalSlot orthogonal_slot(int order, int member);
int orthogonal_member(int order, const OrthogonalSlot& slot);

struct ExpandResult {
  std::vector<double> coeffs;
  double residual;  // norm of U - sum c_s basis_s in the tensor dot metric
};

/// Least-squares expansion of u in the given space.
ExpandResult expand(const TensorD& u, const TensorSpace& space);

/// Assemble sum_s coeffs[s] * basis[s].
TensorD combine(const TensorSpace& space, const std::vector<double>& coeffs);

/// Negative rotational Laplacian of a monomial-i term:
/// -L^2 (e1^k1 e2^k2 e3^k3 i^l) as a four-term combination; the eigenvalue
/// n(n+1) appears on the original term, with order-preserving corrections.
tensors::MPoly laplacian_monomial(int k1, int k2, int k3, int l);

/// Reduced rotation matrix element d^n_{m m'}(alpha) with d(0) = delta.
double wigner_d_small(int n, int m, int mp, double alpha);

/// D^n_{m m'}(p) = exp(-i m beta) d^n_{m m'}(alpha) exp(-i m' gamma).
std::complex<double> wigner_D(int n, int m, int mp, const so3::EulerAngles& e);

/// Numerical rank with singular values above rel_tol * sigma_max.
int numeric_rank(const std::vector<std::vector<double>>& gram, double rel_tol = 1e-9);

/// Largest principal angle between the spans of two spaces (radians).
double max_principal_angle(const TensorSpace& a, const TensorSpace& b);

/// Gram matrix in the tensor dot metric.
std::vector<std::vector<double>> gram_matrix(const TensorSpace& s);

/// Orthonormalize (drops nothing; members must be independent).
TensorSpace orthonormalized(const TensorSpace& s);

}  // namespace anisotens::bases
