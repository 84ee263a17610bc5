#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rgov/polykron.hpp"
#include "rgov/types.hpp"

namespace rgov {

// ============================================================================
// Problem description
// ============================================================================
//
// Plant (pre-stabilized, reference enters through B):
//   x(k+1) = A x(k) + B v(k) + B_w w(k),   v(k+1) = beta v(k) when ungoverned.
// Constraints are polynomials in the joint state x_v = [x; v] with affine
// dependence on an unknown parameter theta inside a box:
//   f_i(x_v, theta) = d_{i,0} theta + sum_j ( c_{i,j} x_v^j + d_{i,j} theta x_v^j ) <= h_i.

struct PolyConstraint {
  std::string name;
  double h = 0.0;                // h >= 0 required
  Vec d0;                        // length n_theta (empty when theta-free)
  std::map<int, Vec> c;          // degree j -> row over sigma(n, j)
  std::map<int, Vec> d;          // degree j -> row over n_theta * sigma(n, j)

  int max_degree() const;
  bool is_linear_certain() const;  // pure degree-1 row, no theta terms
};

struct ProblemSpec {
  Mat A;       // n_x x n_x, Schur (checked by validate)
  Mat B;       // n_x x n_v
  Mat Bw;      // n_x x n_w (0 columns when no disturbance channel)
  double beta = 0.95;
  int degree = 1;  // p, max constraint degree
  std::vector<PolyConstraint> constraints;
  Box theta_box;   // n_theta
  Box w_box;       // n_w

  int nx() const { return static_cast<int>(A.rows()); }
  int nv() const { return static_cast<int>(B.cols()); }
  int nw() const { return static_cast<int>(Bw.cols()); }
  int n() const { return nx() + nv(); }
  int ntheta() const { return theta_box.size(); }

  void validate() const;  // throws Error(InvalidArgument) naming the field
};

// Evaluates f_i directly from the constraint maps (reference route used by
// tests and the theta sweep).
double eval_constraint(const PolyConstraint& con, const Vec& x_v,
                       const Vec& theta);

// ============================================================================
// Extended lifted system
// ============================================================================
//
// X_v = [x_v; x_v^2; ...; x_v^p] evolves linearly driven by products of
// state powers and disturbance powers:
//   X_v(k+1) = Phi X_v(k) + Phi_w D(k),
//   D(k) = stack of x_v^i(k) (x) w^q(k), q >= 1, i + q <= p, ordered by
//          total degree then i.

struct ExtendedSystem {
  int n = 0;   // dim of x_v
  int nw = 0;
  int p = 1;
  Mat phi11;   // [[A, B], [0, beta I]]
  Mat phi10;   // [[Bw], [0]]
  std::map<std::pair<int, int>, Mat> blocks;  // (j, i) -> Phi_{j,i}
  Mat Phi;
  Mat Phi_w;
  std::vector<PowerBasis> x_bases;            // degrees 1..p
  std::vector<PowerBasis> w_bases;            // degrees 0..p (when nw > 0)
  std::vector<std::pair<int, int>> dist_layout;  // (i, q) block order
  std::vector<int> x_offset;                  // degree-j block start, index j-1
  std::vector<int> dist_offset;

  int dim() const { return static_cast<int>(Phi.rows()); }
  int dist_dim() const { return static_cast<int>(Phi_w.cols()); }
  std::string ordering_id() const;

  // Stacks eval_power over degrees 1..p (the nonlinear embedding X_v(x_v)).
  Vec embed(const Vec& x_v) const;
  // Assembles D(k) from current x_v and w values.
  Vec dist_vector(const Vec& x_v, const Vec& w) const;
};

Mat build_phi11(const Mat& A, const Mat& B, double beta);
Mat build_phi10(const Mat& Bw, int nv);

// One-step-ahead blocks Phi_{j,i} satisfying
//   x_v^j(k+1) = sum_{i=0}^{j} Phi_{j,i} (x_v^i(k) (x) w^{j-i}(k))
// built by the Kronecker product recursion through the stack compression /
// expansion selectors and the commutation matrices.
std::map<std::pair<int, int>, Mat> build_blocks(const Mat& phi11,
                                                const Mat& phi10, int p);

ExtendedSystem assemble_extended(const Mat& phi11, const Mat& phi10, int p);
ExtendedSystem assemble_extended(const ProblemSpec& problem);

// ============================================================================
// Constraint lifting
// ============================================================================

// Row-stacked form  D0 theta + C0 X_v + C1 (theta (x) X_v) <= H.
struct LiftedConstraints {
  Mat D0;   // n_c x n_theta
  Mat C0;   // n_c x dim(X_v)
  Mat C1;   // n_c x (n_theta * dim(X_v))
  Vec H;
  std::vector<std::string> names;
};

LiftedConstraints lift_constraints(const ProblemSpec& problem,
                                   const ExtendedSystem& ext);

Vec eval_lifted(const LiftedConstraints& lc, const Vec& X, const Vec& theta);

// One time-0 inequality row over the lifted state.
struct LinearRow {
  Vec coeff;
  double rhs = 0.0;
  int constraint = -1;  // id for row tags
  int vertex = -1;      // theta-vertex id, -1 when not applicable
};

// Replaces the parametric constraints by their 2^{n_theta} theta-vertex
// instances (affine dependence makes the vertices dominate the box).
// Vertex id bit b picks the upper bound of theta coordinate b.
std::vector<LinearRow> instantiate_vertices(const LiftedConstraints& lc,
                                            const Box& theta_box);

// Purely linear theta-free constraints as rows over x_v (the stage-one rows).
std::vector<LinearRow> linear_rows(const ProblemSpec& problem);

// Equilibrium map x = A x + B r.
Vec shift_equilibrium(const Mat& A, const Mat& B, const Vec& r);

// theta vertex by id (bit b of vid selects upper bound of coordinate b).
Vec theta_vertex(const Box& theta_box, int vid);

}  // namespace rgov
