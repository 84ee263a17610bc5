#pragma once

#include <vector>

#include "rgov/types.hpp"

namespace rgov {

// maximize c'z subject to G z <= g, z free.
struct LinearProgram {
  Vec c;
  Mat G;
  Vec g;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Degenerate };

struct LpOutcome {
  LpStatus status = LpStatus::Degenerate;
  double value = 0.0;  // +inf when unbounded, -inf when infeasible
  Vec point;           // maximizer, present only when Optimal
  // Rows whose intersection defines the reported vertex (the optimal basis);
  // used to warm-start the active-set engine.  Size == dim when clean.
  std::vector<int> active_rows;
  int iterations = 0;
};

// Self-contained dense two-phase simplex.  The simplex runs on the dual
// (min g'y s.t. G'y = c, y >= 0) so the working basis stays dim x dim even
// for polytopes with tens of thousands of rows; the primal maximizer is
// recovered from the simplex multipliers.  Pivot selection is Dantzig with
// lowest-index tie-break, switching to Bland's rule on stall, which makes
// every outcome deterministic.  A result is only reported Optimal after the
// recovered point passes a feasibility check (scaled tolerance 1e-7);
// anything suspicious degrades to Degenerate rather than returning a wrong
// optimum.
LpOutcome solve_lp(const LinearProgram& lp);

// Warm-started vertex-following maximizer over a growing set of rows.
// Used for the long redundancy-test loops: consecutive solves over the same
// polytope reuse the previous optimal vertex, so most solves take a handful
// of pivots.  Falls back to solve_lp whenever the warm state is unusable
// (infeasible start, singular basis, stall), so results never depend on the
// warm path being healthy.
class PolytopeSolver {
 public:
  explicit PolytopeSolver(int dim);

  int add_row(const Vec& coeff, double rhs);  // returns row id
  void remove_row(int id);                    // marks the row inactive
  int dim() const { return dim_; }
  int row_count() const { return count_; }    // includes removed rows
  bool alive(int id) const { return alive_[id] != 0; }
  Vec row(int id) const { return G_.row(id).transpose(); }
  double rhs(int id) const { return g_(id); }

  struct Result {
    LpStatus status = LpStatus::Degenerate;
    double value = 0.0;
    int pivots = 0;
  };

  // maximize c'z over the live rows; exclude_row (if >= 0) is ignored, which
  // is exactly the relaxation needed by a redundancy test.
  Result maximize(const Vec& c, int exclude_row = -1);

 private:
  Result maximize_impl(const Vec& c, int exclude_row);
  Result cold_start(const Vec& c, int exclude_row);
  bool seed_from(const LpOutcome& out, const std::vector<int>& row_ids);
  void refresh_products();

  int dim_;
  int count_ = 0;
  Mat G_;   // row capacity grows by doubling
  Vec g_;
  std::vector<char> alive_;

  bool warm_ = false;
  std::vector<int> active_;  // dim_ live row ids whose planes meet at z_
  Vec z_;
  Vec gz_;  // cached G_ * z_ over allocated rows
};

}  // namespace rgov
