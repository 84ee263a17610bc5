#pragma once

#include <string>
#include <vector>

#include "rgov/moas.hpp"
#include "rgov/polykron.hpp"
#include "rgov/types.hpp"

namespace rgov {

// Nonlinear embedding of the joint state x_v = [x; v] into the stacked
// power vector the admissible set lives on.  Carries the ordering id so a
// polytope built under a different monomial convention is rejected instead
// of silently misread.
struct LiftingMap {
  int nx = 0;
  int nv = 0;
  int p = 1;
  std::vector<PowerBasis> bases;  // degrees 1..p over n = nx + nv variables
  std::vector<int> offsets;      // start of the degree-j block, index j-1
  std::string ordering;

  int n() const { return nx + nv; }
  int dim() const;
  Vec embed(const Vec& x, const Vec& v) const;
};

LiftingMap make_lifting_map(int nx, int nv, int p);

// Online reference governor: v(k) = (1 - lambda(k)) * beta * v(k-1) with
// lambda(k) the largest factor in [0,1] keeping the embedded pair inside
// the admissible polytope (found by bisection on the safe side).
struct GovernorState {
  Polytope moas;
  LiftingMap lift;
  double beta = 0.95;
  int bisection_depth = 30;
  Vec v;                           // empty until initialized
  double last_lambda = 0.0;        // diagnostics from the latest update
  bool margin_exhausted = false;   // latched when even lambda = 0 failed
};

GovernorState make_governor(Polytope moas, LiftingMap lift, double beta,
                            int bisection_depth = 30);

// Membership of (x, v) in the admissible set (embed + row check).
bool admissible(const GovernorState& s, const Vec& x, const Vec& v,
                double tol = 1e-7);

// Near-minimum-norm admissible initial reference.  v = 0 is returned when
// admissible; for scalar v an outward scan plus boundary bisection (1e-9)
// finds the admissible value closest to zero on each sign, bounded by the
// polytope's own v-coordinate range; for vector v a coarse grid over the
// caller-supplied box picks a feasible start refined by coordinate descent.
// Throws Error(InadmissibleInitialState) when nothing admissible exists.
Vec init_reference(const Vec& x0, const Polytope& moas, const LiftingMap& lift,
                   const Box* v_box = nullptr);

// Sets state.v from init_reference.
void initialize(GovernorState& state, const Vec& x0,
                const Box* v_box = nullptr);

// One governor step: tests lambda = 1 (v = 0) first, otherwise bisects to
// state.bisection_depth keeping the feasible side.  When even lambda = 0 is
// inadmissible (disturbance left the declared box) the reference is held at
// beta * v and margin_exhausted latches.  Returns the new reference.
Vec update(GovernorState& state, const Vec& x);

}  // namespace rgov
