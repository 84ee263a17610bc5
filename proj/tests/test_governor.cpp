#include <cmath>
#include <random>

#include "doctest.h"
#include "rgov/governor.hpp"

using namespace rgov;

namespace {

// The strip |x + v| <= 1 over the joint degree-1 space (nx = 1, nv = 1).
Polytope strip_set() {
  Polytope poly;
  poly.G = Mat(2, 2);
  poly.G << 1, 1, -1, -1;
  poly.g = Vec::Ones(2);
  poly.ordering = "glexd;n=2;p=1";
  return poly;
}

GovernorState strip_governor(double beta = 0.9, int depth = 30) {
  return make_governor(strip_set(), make_lifting_map(1, 1, 1), beta, depth);
}

}  // namespace

TEST_CASE("lifting map embeds the joint state into stacked powers") {
  LiftingMap map = make_lifting_map(2, 1, 2);
  CHECK(map.n() == 3);
  CHECK(map.dim() == 3 + 6);
  CHECK(map.ordering == "glexd;n=3;p=2");

  Vec x(2), v(1);
  x << 1.0, 0.0;
  v << 0.0;
  Vec X = map.embed(x, v);
  Vec want(9);
  want << 1, 0, 0, 1, 0, 0, 0, 0, 0;
  CHECK((X - want).norm() == 0.0);

  x << 2.0, -1.0;
  v << 3.0;
  X = map.embed(x, v);
  // degree-2 basis over (x1, x2, v): x1^2, x1x2, x1v, x2^2, x2v, v^2
  Vec want2(9);
  want2 << 2, -1, 3, 4, -2, 6, 1, -3, 9;
  CHECK((X - want2).norm() == 0.0);

  CHECK_THROWS_AS(map.embed(Vec::Zero(3), v), Error);
  CHECK_THROWS_AS(make_lifting_map(0, 0, 1), Error);
  CHECK_THROWS_AS(make_lifting_map(1, 1, 0), Error);
}

TEST_CASE("governor construction validates its inputs") {
  CHECK_THROWS_AS(strip_governor(1.0), Error);
  CHECK_THROWS_AS(strip_governor(0.0), Error);
  CHECK_THROWS_AS(strip_governor(0.9, 0), Error);

  // Ordering mismatch is rejected with both ids in the message.
  Polytope poly = strip_set();
  poly.ordering = "glexd;n=2;p=2";
  try {
    make_governor(poly, make_lifting_map(1, 1, 1), 0.9);
    FAIL_CHECK("expected ordering mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("glexd;n=2;p=2") != std::string::npos);
    CHECK(std::string(e.what()).find("glexd;n=2;p=1") != std::string::npos);
  }

  // A blank ordering skips the string check but not the dimension check.
  Polytope blank = strip_set();
  blank.ordering.clear();
  CHECK_NOTHROW(make_governor(blank, make_lifting_map(1, 1, 1), 0.9));
  CHECK_THROWS_AS(make_governor(blank, make_lifting_map(2, 1, 1), 0.9), Error);
}

TEST_CASE("initial reference: zero wins when admissible") {
  GovernorState s = strip_governor();
  Vec x0(1);
  x0 << 0.3;
  initialize(s, x0);
  REQUIRE(s.v.size() == 1);
  CHECK(s.v(0) == 0.0);
  CHECK(admissible(s, x0, s.v));
}

TEST_CASE("initial reference: nearest admissible scalar on the strip") {
  // x0 = 1.5 needs x + v <= 1, so the admissible v closest to zero is -0.5.
  GovernorState s = strip_governor();
  Vec x0(1);
  x0 << 1.5;
  initialize(s, x0);
  REQUIRE(s.v.size() == 1);
  CHECK(s.v(0) == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(admissible(s, x0, s.v));
  CHECK(!s.margin_exhausted);
}

TEST_CASE("initial reference: infeasible state is reported") {
  // Clamp |v| <= 0.2: x0 = 1.5 would need v <= -0.5.
  Polytope poly;
  poly.G = Mat(4, 2);
  poly.G << 1, 1, -1, -1, 0, 1, 0, -1;
  poly.g = Vec(4);
  poly.g << 1, 1, 0.2, 0.2;
  poly.ordering = "glexd;n=2;p=1";
  GovernorState s = make_governor(poly, make_lifting_map(1, 1, 1), 0.9);
  Vec x0(1);
  x0 << 1.5;
  try {
    initialize(s, x0);
    FAIL_CHECK("expected InadmissibleInitialState");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InadmissibleInitialState);
  }
}

TEST_CASE("initial reference: vector search needs and uses the box") {
  // |x + v1 + v2| <= 1 with box bounds keeping the set compact.
  Polytope poly;
  poly.G = Mat(6, 3);
  poly.G << 1, 1, 1, -1, -1, -1, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  poly.g = Vec(6);
  poly.g << 1, 1, 3, 3, 3, 3;
  poly.ordering = "glexd;n=3;p=1";
  LiftingMap map = make_lifting_map(1, 2, 1);
  Vec x0(1);
  x0 << 1.5;

  CHECK_THROWS_AS(init_reference(x0, poly, map), Error);

  Box v_box;
  v_box.lower = -3.0 * Vec::Ones(2);
  v_box.upper = 3.0 * Vec::Ones(2);
  Vec v = init_reference(x0, poly, map, &v_box);
  REQUIRE(v.size() == 2);
  CHECK(v.sum() <= -0.5 + 1e-6);   // admissibility boundary
  CHECK(v.norm() <= 0.51);         // near the minimum-norm solution
  CHECK(poly.contains(map.embed(x0, v), 1e-7));
}

TEST_CASE("update tests full relaxation first") {
  GovernorState s = strip_governor();
  s.v = Vec::Constant(1, -0.5);
  Vec x(1);
  x << 0.2;  // zero reference admissible: |0.2| <= 1
  Vec v = update(s, x);
  CHECK(v(0) == 0.0);
  CHECK(s.last_lambda == 1.0);

  // Zero is a fixed point under admissible states.
  v = update(s, x);
  CHECK(v(0) == 0.0);
  CHECK(s.last_lambda == 1.0);
}

TEST_CASE("bisection lands on the feasibility boundary") {
  GovernorState s = strip_governor(0.9, 30);
  s.v = Vec::Constant(1, -0.5);
  Vec x(1);
  x << 1.2;
  // decayed = -0.45; x + (1-lambda)(-0.45) <= 1 iff lambda <= 5/9.
  Vec v = update(s, x);
  CHECK(s.last_lambda == doctest::Approx(5.0 / 9.0).epsilon(1e-6));
  CHECK(v(0) == doctest::Approx(-0.2).epsilon(1e-6));
  CHECK(admissible(s, x, v));
  CHECK(!s.margin_exhausted);
}

TEST_CASE("a depth-d bisection equals the exhaustive dyadic grid") {
  const int depth = 10;
  GovernorState s = strip_governor(0.9, depth);
  s.v = Vec::Constant(1, -0.5);
  Vec x(1);
  x << 1.2;
  Vec decayed = 0.9 * s.v;
  update(s, x);
  double brute = 0.0;
  const int cells = 1 << depth;
  for (int j = cells; j >= 0; --j) {
    double lam = static_cast<double>(j) / cells;
    if (lam == 1.0) continue;  // the lambda = 1 shortcut tests v = 0, not this
    Vec cand = (1.0 - lam) * decayed;
    if (s.moas.contains(s.lift.embed(x, cand), 1e-7)) {
      brute = lam;
      break;
    }
  }
  CHECK(s.last_lambda == brute);
}

TEST_CASE("exhausted safety margin holds the decayed reference and latches") {
  GovernorState s = strip_governor(0.9, 30);
  s.v = Vec::Constant(1, -0.5);
  Vec x(1);
  x << 3.0;  // no reference in [v*beta, 0] is admissible
  Vec v = update(s, x);
  CHECK(v(0) == doctest::Approx(-0.45));
  CHECK(s.last_lambda == 0.0);
  CHECK(s.margin_exhausted);

  // The latch survives later successful updates.
  x << 0.0;
  update(s, x);
  CHECK(s.last_lambda == 1.0);
  CHECK(s.margin_exhausted);

  // initialize() clears it.
  initialize(s, x);
  CHECK(!s.margin_exhausted);
}

TEST_CASE("update requires initialization") {
  GovernorState s = strip_governor();
  Vec x(1);
  x << 0.0;
  CHECK_THROWS_AS(update(s, x), Error);
}

TEST_CASE("reference norm decays geometrically whatever the state does") {
  std::mt19937 gen(55);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  GovernorState s = strip_governor(0.93, 30);
  s.v = Vec::Constant(1, -0.8);
  const double v0 = s.v.lpNorm<Eigen::Infinity>();
  for (int k = 1; k <= 60; ++k) {
    Vec x(1);
    x << dist(gen);
    Vec v = update(s, x);
    CHECK(v.lpNorm<Eigen::Infinity>() <=
          std::pow(0.93, k) * v0 * (1.0 + 1e-12));
  }
}
