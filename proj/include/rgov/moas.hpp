#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "rgov/lift.hpp"
#include "rgov/lp.hpp"
#include "rgov/types.hpp"

namespace rgov {

// Inequality description G z <= g with per-row provenance tags.
struct RowTag {
  int constraint = -1;  // base-row id (or synthetic id for box rows)
  int t = 0;            // prediction time the row was generated at
  int vertex = -1;      // theta-vertex id, -1 when not applicable
};

struct Polytope {
  Mat G;
  Vec g;
  std::vector<RowTag> tags;
  std::string ordering;  // monomial ordering id of the column space

  int dim() const { return static_cast<int>(G.cols()); }
  int rows() const { return static_cast<int>(G.rows()); }
  bool contains(const Vec& z, double tol = 1e-7) const;
};

struct MoasOptions {
  // NaN selects the default: 0 for an exactly-zero disturbance set, else
  // 1e-6 * max rhs of the base rows.
  double eps = std::numeric_limits<double>::quiet_NaN();
  int iteration_cap = 10000;
  double row_tol = 1e-7;  // absolute redundancy tolerance, objective vs rhs
};

struct MoasResult {
  Polytope polytope;
  int t_star = -1;    // first t with every t+1 candidate row redundant
  int iterations = 0;  // equals t_star; kept for reporting symmetry
  int rows_before = 0;  // accumulated non-redundant rows before the final pass
  int rows_after = 0;   // rows in the reported polytope
};

// Maximal constraint-admissible set of x(k+1) = Phi x + Phi_w d, d in a box:
// time-t rows are  c Phi^t x <= h - sum_{s<t} support(c Phi^s Phi_w, box)
// - (t > 0 ? eps : 0).  Terminates at the first t where all candidate t+1
// rows are redundant against the accumulated set (LP certificate); runs an
// incremental prune per iteration plus a final full redundancy pass, and
// re-verifies the stopping certificate on the pruned set.
MoasResult compute_moas(const Mat& Phi, const Mat& Phi_w,
                        const std::vector<LinearRow>& base_rows,
                        const Box& dist_box, const MoasOptions& opt,
                        const std::string& ordering);

// Stage one: admissible set for the closed-loop pair (phi11, phi10) under
// the raw disturbance box, from linear certain rows on x_v.
MoasResult compute_linear_moas(const Mat& phi11, const Mat& phi10,
                               const std::vector<LinearRow>& rows,
                               const Box& w_box, const MoasOptions& opt = {});

// Stage two: admissible set of the extended lifted system under the
// interval hull of the disturbance product vector.  Base rows are the
// theta-vertex instantiations plus box rows bounding the extended state.
MoasResult compute_robust_moas(const ExtendedSystem& ext,
                               const std::vector<LinearRow>& vertex_rows,
                               const std::vector<LinearRow>& state_box_rows,
                               const Box& omega, const MoasOptions& opt = {});

// Coordinate bounds of a polytope via 2 dim LPs; throws UnboundedCoordinate.
Box extract_box(const Polytope& poly);

// Interval hull of the embedding X_v over an x_v box (interval arithmetic
// per monomial).
Box lift_box(const Box& x_box, const ExtendedSystem& ext);

// Interval hull of the disturbance product vector D over x_v and w boxes.
Box omega_w(const Box& x_box, const Box& w_box, const ExtendedSystem& ext);

// Box rows +/- e_i <= bounds as time-0 rows; constraint ids are assigned
// sequentially from first_id (upper bound of coordinate i first).
std::vector<LinearRow> box_rows(const Box& box, int first_id);

bool is_redundant(const Vec& coeff, double rhs, const Polytope& poly,
                  double tol = 1e-7);

// Text export/import: header lines (dim, ordering, rows) then one row per
// line "g_1 ... g_d | rhs | constraint,t,vertex" with 17 significant digits,
// so a save/load round trip is bit-exact.
void save_polytope(const std::filesystem::path& path, const Polytope& poly);
Polytope load_polytope(const std::filesystem::path& path);

}  // namespace rgov
