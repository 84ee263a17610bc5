#include "rgov/pipeline.hpp"

#include <chrono>

namespace rgov {

GovernorSetReport build_governor_set(const ProblemSpec& spec,
                                     const MoasOptions& opt) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();

  GovernorSetReport report;
  ExtendedSystem ext = assemble_extended(spec);

  std::vector<LinearRow> stage1 = linear_rows(spec);
  if (stage1.empty())
    throw Error(ErrorCode::InvalidArgument,
                "the two-stage construction needs at least one certain "
                "linear constraint row");
  report.linear = compute_linear_moas(ext.phi11, ext.phi10, stage1,
                                      spec.w_box, opt);
  report.state_box = extract_box(report.linear.polytope);
  report.lifted_box = lift_box(report.state_box, ext);
  report.omega = omega_w(report.state_box, spec.w_box, ext);

  LiftedConstraints lifted = lift_constraints(spec, ext);
  std::vector<LinearRow> vertex = instantiate_vertices(lifted, spec.theta_box);
  report.vertex_rows = static_cast<int>(vertex.size());

  report.single_stage = spec.degree == 1 && spec.ntheta() == 0;
  std::vector<LinearRow> box;
  if (!report.single_stage) {
    box = box_rows(report.lifted_box,
                   static_cast<int>(spec.constraints.size()));
  }
  report.box_row_count = static_cast<int>(box.size());
  report.robust = compute_robust_moas(ext, vertex, box, report.omega, opt);

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

GovernorState make_governor_from(const ProblemSpec& spec,
                                 const GovernorSetReport& report,
                                 int bisection_depth) {
  LiftingMap lift = make_lifting_map(spec.nx(), spec.nv(), spec.degree);
  return make_governor(report.robust.polytope, lift, spec.beta,
                       bisection_depth);
}

}  // namespace rgov
