#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rgov/types.hpp"

namespace rgov {

// ============================================================================
// Monomial bases
// ============================================================================
//
// A degree-p power vector x^p collects every monomial of total degree p in
// the n entries of x, without repetition.  The canonical ordering used
// everywhere in this library is graded-lexicographic with exponent tuples
// sorted lexicographically decreasing, e.g. for n = 2, p = 2:
//   (2,0), (1,1), (0,2)  ->  x^2 = [x1^2, x1 x2, x2^2].
// This ordering coincides with first occurrence in the Kronecker power
// x^{p(x)}, which makes the compression/expansion matrices below consistent.

struct Monomial {
  std::vector<int> exponents;  // one entry per variable, sums to the degree
  int degree() const;
};

struct PowerBasis {
  int n = 0;  // number of variables
  int p = 0;  // total degree
  std::vector<Monomial> monomials;
  std::map<std::vector<int>, int> position;  // exponent tuple -> index

  int size() const { return static_cast<int>(monomials.size()); }
  int index_of(const std::vector<int>& exponents) const;  // throws if absent
};

// Number of degree-p monomials in n variables: (n+p-1)! / (p! (n-1)!).
// Throws Error(Overflow) when the count exceeds int64 range.
std::int64_t sigma(int n, int p);

PowerBasis power_basis(int n, int p);

// Dense Kronecker product helpers.
Mat kron(const Mat& a, const Mat& b);
Vec kron_vec(const Vec& a, const Vec& b);

// Full Kronecker power x^{p(x)} of length n^p (p = 0 gives [1]).
Vec kron_power(const Vec& x, int p);

// Evaluates the compressed power vector x^p in basis order.
Vec eval_power(const Vec& x, const PowerBasis& basis);

// ============================================================================
// Structural (0/1 selection) matrices
// ============================================================================
//
// compression_matrix M_c (sigma x n^p): selects the first occurrence of each
// monomial from the Kronecker power, so eval_power(x) = M_c kron_power(x).
// expansion_matrix M_e (n^p x sigma): maps each Kronecker slot to its
// monomial, so kron_power(x) = M_e eval_power(x).  M_c M_e = I exactly.
SpMat compression_matrix(const PowerBasis& basis);
SpMat expansion_matrix(const PowerBasis& basis);

// One-level stack variants used by the lifting recursion, which never forms
// n^p-sized intermediates:
//   x (x) x^{p-1} = stack_expansion(n, p) * x^p
//   x^p = stack_compression(n, p) * (x (x) x^{p-1})
// stack_compression selects the slot with the lowest leading variable, and
// stack_compression * stack_expansion = I exactly.
SpMat stack_expansion(int n, int p);
SpMat stack_compression(int n, int p);

// Ordered basis for mixed products a^p (x) b^q; entry (i, j) sits at
// i * sigma(n_b, q) + j.
struct MixedBasis {
  PowerBasis a;
  PowerBasis b;
  int index(int i, int j) const { return i * b.size() + j; }
  int size() const { return a.size() * b.size(); }
};
MixedBasis mixed_basis(int n_a, int p, int n_b, int q);

// Commutation/merge matrix Gamma_{i,j} defined by the identity
//   w (x) (x^i (x) w^{j-1-i}) = Gamma_{i,j} (x^i (x) w^{j-i}),
// built by exponent bookkeeping; exactly one unit entry per row.
// Dimensions: (n_w sigma(n_x,i) sigma(n_w,j-1-i)) x (sigma(n_x,i) sigma(n_w,j-i)).
SpMat commute_merge_matrix(int i, int j, int n_x, int n_w);

}  // namespace rgov
