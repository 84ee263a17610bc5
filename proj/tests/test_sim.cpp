#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rgov/sim.hpp"

using namespace rgov;

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937& rng() {
  static std::mt19937 gen(31337);
  return gen;
}

double unit() {
  static std::uniform_real_distribution<double> dist(-1.0, 1.0);
  return dist(rng());
}

Mat random_mat(int r, int c, double span = 1.0) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = span * unit();
  return m;
}

// Truncated-series discretization, the independent route for c2d.
std::pair<Mat, Mat> series_c2d(const Mat& F, const Mat& G, double Ts) {
  const int n = static_cast<int>(F.rows());
  Mat A = Mat::Identity(n, n);
  Mat S = Mat::Identity(n, n) * Ts;  // int_0^Ts e^{F s} ds
  Mat term = Mat::Identity(n, n);
  double fact = 1.0;
  for (int j = 1; j <= 20; ++j) {
    term = term * (F * Ts);
    fact *= j;
    A += term / fact;
    S += term * Ts / (fact * (j + 1));
  }
  return {A, S * G};
}

}  // namespace

TEST_CASE("sampled pitch loop reproduces the published four-decimal entries") {
  AircraftPreset preset;
  auto [A, B] = c2d(aircraft_closed_loop(preset));
  REQUIRE(A.rows() == 2);
  CHECK(std::abs(A(0, 0) - 0.9814) <= 5e-5);
  CHECK(std::abs(A(0, 1) - 0.0072) <= 5e-5);
  CHECK(std::abs(A(1, 0) - -3.3347) <= 5e-5);
  CHECK(std::abs(A(1, 1) - 0.4940) <= 5e-5);
  CHECK(std::abs(B(0, 0) - 0.0186) <= 5e-5);
  CHECK(std::abs(B(1, 0) - 3.3347) <= 5e-5);
}

TEST_CASE("discretization closed forms") {
  ContinuousPlant zero;
  zero.F = Mat::Zero(2, 2);
  zero.G = random_mat(2, 1);
  zero.Ts = 0.3;
  auto [A0, B0] = c2d(zero);
  CHECK((A0 - Mat::Identity(2, 2)).norm() == 0.0);
  CHECK((B0 - 0.3 * zero.G).norm() <= 1e-15);

  ContinuousPlant scalar;
  scalar.F = -Mat::Identity(1, 1);
  scalar.G = Mat::Identity(1, 1);
  scalar.Ts = 1.0;
  auto [A1, B1] = c2d(scalar);
  CHECK(A1(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(B1(0, 0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));

  ContinuousPlant bad;
  bad.F = Mat::Zero(2, 2);
  bad.G = Mat::Zero(3, 1);
  bad.Ts = 0.1;
  CHECK_THROWS_AS(c2d(bad), Error);
  bad.G = Mat::Zero(2, 1);
  bad.Ts = 0.0;
  CHECK_THROWS_AS(c2d(bad), Error);
}

TEST_CASE("discretization agrees with the truncated series") {
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const int m = 1 + trial % 2;
    Mat F = random_mat(n, n);
    double Ts = 0.5 / std::max(F.norm(), 1.0);
    Mat G = random_mat(n, m);
    ContinuousPlant plant{F, G, Ts};
    auto [A, B] = c2d(plant);
    auto [Ar, Br] = series_c2d(F, G, Ts);
    CHECK((A - Ar).norm() <= 1e-12 * std::max(1.0, Ar.norm()));
    CHECK((B - Br).norm() <= 1e-12 * std::max(1.0, Br.norm()));
  }
}

TEST_CASE("pitch preset assembles the documented problem") {
  AircraftPreset preset;
  ProblemSpec nominal = build_aircraft_problem(preset, false);
  CHECK(nominal.nx() == 2);
  CHECK(nominal.nv() == 1);
  CHECK(nominal.degree == 3);
  CHECK(nominal.beta == 0.95);
  REQUIRE(nominal.constraints.size() == 4);
  CHECK(nominal.constraints[0].name == "stall-upper");
  CHECK(nominal.constraints[1].name == "stall-lower");
  CHECK(nominal.constraints[2].name == "force-upper");
  CHECK(nominal.constraints[3].name == "force-lower");
  CHECK(nominal.constraints[0].h ==
        doctest::Approx(14.7 * kPi / 180.0).epsilon(1e-12));
  CHECK(nominal.constraints[1].h ==
        doctest::Approx(0.2 * kPi / 180.0).epsilon(1e-12));
  CHECK(nominal.constraints[2].h == 4.0e5);
  CHECK(nominal.theta_box.lower(0) == doctest::Approx(0.8 * 2.5e5));
  CHECK(nominal.theta_box.upper(2) == doctest::Approx(1.2 * 4.35e7));
  CHECK(nominal.w_box.is_zero());
  CHECK(nominal.Bw.norm() == 0.0);

  ProblemSpec disturbed = build_aircraft_problem(preset, true);
  CHECK(disturbed.Bw(0, 0) == 1.0);
  CHECK(disturbed.Bw(1, 0) == 0.0);
  CHECK(disturbed.w_box.lower(0) == -0.05);
  CHECK(disturbed.w_box.upper(0) == 0.05);
}

TEST_CASE("force table matches the closed-form control law") {
  AircraftPreset preset;
  ProblemSpec spec = build_aircraft_problem(preset, false);
  const PolyConstraint& upper = spec.constraints[2];
  const PolyConstraint& lower = spec.constraints[3];
  for (int s = 0; s < 100; ++s) {
    Vec x_v(3), theta(3);
    x_v << 0.3 * unit(), 2.0 * unit(), 0.3 * unit();
    theta << preset.l0 * (1 + 0.2 * unit()), preset.l1 * (1 + 0.2 * unit()),
        preset.l3 * (1 + 0.2 * unit());
    double u = aircraft_force(preset, x_v, theta);
    CHECK(eval_constraint(upper, x_v, theta) ==
          doctest::Approx(u).epsilon(1e-12));
    CHECK(eval_constraint(lower, x_v, theta) ==
          doctest::Approx(-u).epsilon(1e-12));
  }
}

TEST_CASE("hand force values") {
  AircraftPreset preset;
  Vec theta(3);
  theta << preset.l0, preset.l1, preset.l3;

  // Quiet level flight: only the constant lift term acts.
  Vec rest = Vec::Zero(3);
  CHECK(aircraft_force(preset, rest, theta) ==
        doctest::Approx(5.0e4).epsilon(1e-12));

  // The ungoverned 14-degree initial condition demands far more than the
  // actuator bound (about 1.24e7 N against a 4e5 N limit).
  Vec start(3);
  start << preset.x0()(0), preset.x0()(1), 0.0;
  double u0 = aircraft_force(preset, start, theta);
  CHECK(std::abs(u0) > 30.0 * preset.u_max);
  CHECK(std::abs(u0) == doctest::Approx(1.24e7).epsilon(0.01));
}

TEST_CASE("disturbance kinds parse and print both ways") {
  for (auto kind : {DisturbanceKind::Zero, DisturbanceKind::UniformRandom,
                    DisturbanceKind::WorstCorner})
    CHECK(parse_disturbance_kind(disturbance_kind_name(kind)) == kind);
  CHECK_THROWS_AS(parse_disturbance_kind("gusts"), Error);
}

TEST_CASE("disturbance streams are deterministic and box-bounded") {
  Box box;
  box.lower = Vec::Constant(1, -0.05);
  box.upper = Vec::Constant(1, 0.05);

  DisturbanceSource zero(DisturbanceKind::Zero, box, 9);
  for (int i = 0; i < 5; ++i) CHECK(zero.next()(0) == 0.0);

  // Frozen values from an independent implementation of the stream
  // (seed 20240817, box [-0.05, 0.05]).
  DisturbanceSource rnd(DisturbanceKind::UniformRandom, box, 20240817ULL);
  CHECK(rnd.next()(0) == 0.018083005050513037);
  CHECK(rnd.next()(0) == 0.009843414948253769);
  CHECK(rnd.next()(0) == -0.01647648954303258);
  CHECK(rnd.next()(0) == -0.01763054914623359);

  rnd.reset();
  CHECK(rnd.next()(0) == 0.018083005050513037);

  DisturbanceSource again(DisturbanceKind::UniformRandom, box, 20240817ULL);
  DisturbanceSource other(DisturbanceKind::UniformRandom, box, 20240818ULL);
  rnd.reset();
  bool any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    double a = rnd.next()(0);
    CHECK(again.next()(0) == a);
    any_diff = any_diff || other.next()(0) != a;
  }
  CHECK(any_diff);

  rnd.reset();
  for (int i = 0; i < 100000; ++i) {
    double w = rnd.next()(0);
    CHECK(w >= -0.05);
    CHECK(w <= 0.05);
  }

  DisturbanceSource corner(DisturbanceKind::WorstCorner, box, 0);
  CHECK(corner.next()(0) == 0.05);
  CHECK(corner.next()(0) == -0.05);
  CHECK(corner.next()(0) == 0.05);
  corner.reset();
  CHECK(corner.next()(0) == 0.05);

  Box bad;
  bad.lower = Vec::Constant(1, 1.0);
  bad.upper = Vec::Constant(1, -1.0);
  CHECK_THROWS_AS(DisturbanceSource(DisturbanceKind::Zero, bad, 0), Error);
}

TEST_CASE("simulation bookkeeping") {
  ProblemSpec spec;
  spec.A = Mat(1, 1);
  spec.A << 0.5;
  spec.B = Mat(1, 1);
  spec.B << 1.0;
  spec.Bw = Mat(1, 0);
  spec.beta = 0.9;
  spec.degree = 1;
  spec.w_box.lower = Vec(0);
  spec.w_box.upper = Vec(0);
  PolyConstraint con;
  con.name = "band";
  con.h = 1.0;
  con.c[1] = Vec(2);
  con.c[1] << 1.0, 1.0;
  spec.constraints = {con};
  PolyConstraint neg = con;
  neg.name = "band-neg";
  neg.c[1] = -con.c[1];
  spec.constraints.push_back(neg);
  spec.validate();

  DisturbanceSource none(DisturbanceKind::Zero, spec.w_box, 0);

  // Empty horizon.
  Trajectory empty = simulate(spec, nullptr, Vec::Zero(1), 0, none);
  CHECK(empty.size() == 0);

  // Ungoverned run from the origin stays exactly at the origin.
  Trajectory still = simulate(spec, nullptr, Vec::Zero(1), 10, none);
  REQUIRE(still.size() == 10);
  for (int k = 0; k < 10; ++k) {
    CHECK(still.states[k].norm() == 0.0);
    CHECK(still.refs[k].norm() == 0.0);
    CHECK(still.in_moas[k] == 0);  // no governor, no audit
  }

  // Governed run: reference decays, state converges, audit flags set.
  Polytope strip;
  strip.G = Mat(2, 2);
  strip.G << 1, 1, -1, -1;
  strip.g = Vec::Ones(2);
  strip.ordering = "glexd;n=2;p=1";
  GovernorState gov =
      make_governor(strip, make_lifting_map(1, 1, 1), spec.beta);
  Vec x0(1);
  x0 << 1.5;
  initialize(gov, x0);
  none.reset();
  Trajectory traj = simulate(spec, &gov, x0, 40, none);
  REQUIRE(traj.size() == 40);
  CHECK(traj.states[0](0) == 1.5);
  CHECK(traj.refs[0](0) == doctest::Approx(-0.5).epsilon(1e-6));
  double v0 = std::abs(traj.refs[0](0));
  for (int k = 0; k < 40; ++k) {
    CHECK(traj.in_moas[k] == 1);
    CHECK(traj.margin_flags[k] == 0);
    CHECK(std::abs(traj.refs[k](0)) <=
          std::pow(spec.beta, k) * v0 * (1 + 1e-12));
  }
  CHECK(std::abs(traj.states[39](0)) < 0.05);

  // Uninitialized governor is rejected.
  GovernorState cold =
      make_governor(strip, make_lifting_map(1, 1, 1), spec.beta);
  CHECK_THROWS_AS(simulate(spec, &cold, x0, 5, none), Error);

  // Wrong-size disturbance stream is rejected.
  Box wrong;
  wrong.lower = Vec::Zero(2);
  wrong.upper = Vec::Zero(2);
  DisturbanceSource bad(DisturbanceKind::Zero, wrong, 0);
  CHECK_THROWS_AS(simulate(spec, nullptr, x0, 5, bad), Error);

  // Non-finite states abort with the step index.
  ProblemSpec blowup = spec;
  blowup.A(0, 0) = 1e308;
  try {
    simulate(blowup, nullptr, Vec::Ones(1), 5, none);
    FAIL_CHECK("expected NumericalFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericalFailure);
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }
}

TEST_CASE("theta sweep evaluates constraint families along a trajectory") {
  AircraftPreset preset;
  ProblemSpec spec = build_aircraft_problem(preset, false);
  DisturbanceSource none(DisturbanceKind::Zero, spec.w_box, 0);
  Vec x0(2);
  x0 << 0.01, 0.0;
  Trajectory traj = simulate(spec, nullptr, x0, 5, none);

  SweepResult sweep = theta_sweep(spec, traj);
  CHECK(sweep.constraint_index == 2);  // first theta-dependent row
  CHECK(sweep.constraint_name == "force-upper");
  REQUIRE(sweep.series.size() == 9);  // 8 vertices + midpoint
  for (const SweepSeries& s : sweep.series) {
    REQUIRE(static_cast<int>(s.values.size()) == traj.size());
    double expect_max = 0.0;
    for (int k = 0; k < traj.size(); ++k) {
      Vec x_v(3);
      x_v.head(2) = traj.states[k];
      x_v(2) = traj.refs[k](0);
      double f = eval_constraint(spec.constraints[2], x_v, s.theta);
      CHECK(s.values[k] == doctest::Approx(f).epsilon(1e-12));
      expect_max = std::max(expect_max, std::abs(f));
    }
    CHECK(s.max_abs == doctest::Approx(expect_max));
  }

  // Vertex 0 must be the all-lower corner, last vertex the all-upper corner.
  CHECK((sweep.series[0].theta - spec.theta_box.lower).norm() == 0.0);
  CHECK((sweep.series[7].theta - spec.theta_box.upper).norm() == 0.0);

  CHECK_THROWS_AS(theta_sweep(spec, traj, {}, 99), Error);
  CHECK_THROWS_AS(theta_sweep(spec, traj, {Vec::Zero(2)}, 2), Error);
}
