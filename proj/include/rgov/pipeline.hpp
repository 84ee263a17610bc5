#pragma once

#include "rgov/governor.hpp"
#include "rgov/lift.hpp"
#include "rgov/moas.hpp"

namespace rgov {

// Everything the two-stage construction produces, kept for reporting: the
// stage-one set over x_v, the boxes derived from it, and the final
// admissible polytope over the extended state.
struct GovernorSetReport {
  MoasResult linear;        // stage one, certain linear rows on x_v
  Box state_box;            // coordinate bounds of the stage-one set
  Box lifted_box;           // interval hull of the embedding over state_box
  Box omega;                // interval hull of the disturbance products
  MoasResult robust;        // stage two, the governor's polytope
  int vertex_rows = 0;      // theta-vertex instances fed to stage two
  int box_row_count = 0;
  bool single_stage = false;  // degree 1 and no theta: stage two == stage one
  double wall_seconds = 0.0;
};

// Runs linear MOAS -> extract_box -> lift_box / omega_w -> robust MOAS.
// Degenerate problems (degree 1, no theta) skip the redundant box rows, so
// stage two reproduces stage one exactly.  Requires at least one certain
// linear constraint row for stage one.
GovernorSetReport build_governor_set(const ProblemSpec& spec,
                                     const MoasOptions& opt = {});

// Governor wired to the stage-two polytope of the report.
GovernorState make_governor_from(const ProblemSpec& spec,
                                 const GovernorSetReport& report,
                                 int bisection_depth = 30);

}  // namespace rgov
