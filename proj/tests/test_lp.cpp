#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "rgov/lp.hpp"

using namespace rgov;

namespace {

// Brute-force oracle: enumerate every d-row intersection, keep feasible
// vertices, return the best objective value.  Valid for bounded feasible
// programs (the callers construct those).
double vertex_enumeration_max(const LinearProgram& lp, double feas_tol = 1e-9) {
  const int m = static_cast<int>(lp.G.rows());
  const int d = static_cast<int>(lp.G.cols());
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> pick(d);
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == d) {
      Mat B(d, d);
      Vec rhs(d);
      for (int i = 0; i < d; ++i) {
        B.row(i) = lp.G.row(pick[i]);
        rhs(i) = lp.g(pick[i]);
      }
      Eigen::FullPivLU<Mat> lu(B);
      if (!lu.isInvertible()) return;
      Vec z = lu.solve(rhs);
      double viol = (lp.G * z - lp.g).maxCoeff();
      if (viol <= feas_tol * (1.0 + lp.g.cwiseAbs().maxCoeff()))
        best = std::max(best, lp.c.dot(z));
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[k] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

LinearProgram random_bounded_lp(std::mt19937& rng, int d, int extra_rows) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> rhs(0.5, 3.0);
  LinearProgram lp;
  const int m = 2 * d + extra_rows;
  lp.G = Mat::Zero(m, d);
  lp.g = Vec::Zero(m);
  for (int i = 0; i < d; ++i) {
    lp.G(2 * i, i) = 1.0;
    lp.g(2 * i) = 5.0;
    lp.G(2 * i + 1, i) = -1.0;
    lp.g(2 * i + 1) = 5.0;
  }
  for (int i = 2 * d; i < m; ++i) {
    for (int j = 0; j < d; ++j) lp.G(i, j) = coef(rng);
    lp.g(i) = rhs(rng);  // origin stays strictly feasible
  }
  lp.c = Vec(d);
  for (int j = 0; j < d; ++j) lp.c(j) = coef(rng);
  return lp;
}

}  // namespace

TEST_CASE("simplex matches vertex enumeration on 200 random bounded LPs") {
  std::mt19937 rng(123456);
  for (int trial = 0; trial < 200; ++trial) {
    LinearProgram lp = random_bounded_lp(rng, 3, 8);
    LpOutcome out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    double want = vertex_enumeration_max(lp);
    CHECK(std::abs(out.value - want) <= 1e-7 * (1.0 + std::abs(want)));
    // Reported point is feasible and achieves the reported value.
    CHECK((lp.G * out.point - lp.g).maxCoeff() <= 1e-7);
    CHECK(std::abs(lp.c.dot(out.point) - out.value) <= 1e-9 * (1.0 + std::abs(out.value)));
  }
}

TEST_CASE("simplex matches vertex enumeration in other dimensions") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    int d = 1 + trial % 5;
    LinearProgram lp = random_bounded_lp(rng, d, 6);
    LpOutcome out = solve_lp(lp);
    REQUIRE(out.status == LpStatus::Optimal);
    double want = vertex_enumeration_max(lp);
    CHECK(std::abs(out.value - want) <= 1e-7 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("infeasible and unbounded classification") {
  LinearProgram infeas;
  infeas.c = Vec::Ones(1);
  infeas.G = Mat(2, 1);
  infeas.G << 1, -1;
  infeas.g = Vec(2);
  infeas.g << -1, -1;  // x <= -1 and x >= 1
  CHECK(solve_lp(infeas).status == LpStatus::Infeasible);

  LinearProgram unb;
  unb.c = Vec::Ones(1);
  unb.G = Mat(1, 1);
  unb.G << -1;
  unb.g = Vec::Zero(1);  // x >= 0, maximize x
  CHECK(solve_lp(unb).status == LpStatus::Unbounded);

  LinearProgram free2;  // unbounded direction inside a slab
  free2.c = Vec(2);
  free2.c << 0, 1;
  free2.G = Mat(2, 2);
  free2.G << 1, 0, -1, 0;
  free2.g = Vec::Ones(2);
  CHECK(solve_lp(free2).status == LpStatus::Unbounded);
}

TEST_CASE("no rows means unconstrained") {
  LinearProgram lp;
  lp.c = Vec::Zero(3);
  lp.G = Mat(0, 3);
  lp.g = Vec(0);
  LpOutcome out = solve_lp(lp);
  CHECK(out.status == LpStatus::Optimal);
  CHECK(out.value == 0.0);
  lp.c(1) = 2.0;
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("duplicate and degenerate rows still solve") {
  LinearProgram lp;
  lp.c = Vec(2);
  lp.c << 1, 1;
  lp.G = Mat(6, 2);
  lp.G << 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, -1, -1;
  lp.g = Vec(6);
  lp.g << 1, 1, 1, 1, 2, 3;  // corner (1,1) triple-degenerate
  LpOutcome out = solve_lp(lp);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("deterministic outcomes") {
  std::mt19937 rng(5150);
  LinearProgram lp = random_bounded_lp(rng, 4, 10);
  LpOutcome a = solve_lp(lp);
  LpOutcome b = solve_lp(lp);
  REQUIRE(a.status == LpStatus::Optimal);
  CHECK(a.value == b.value);
  CHECK((a.point - b.point).norm() == 0.0);
  CHECK(a.active_rows == b.active_rows);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("polytope solver agrees with cold solves over many objectives") {
  std::mt19937 rng(2025);
  LinearProgram lp = random_bounded_lp(rng, 3, 12);
  PolytopeSolver solver(3);
  for (int i = 0; i < lp.G.rows(); ++i)
    solver.add_row(lp.G.row(i).transpose(), lp.g(i));
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec c(3);
    for (int j = 0; j < 3; ++j) c(j) = coef(rng);
    lp.c = c;
    LpOutcome want = solve_lp(lp);
    PolytopeSolver::Result got = solver.maximize(c);
    REQUIRE(want.status == LpStatus::Optimal);
    REQUIRE(got.status == LpStatus::Optimal);
    CHECK(std::abs(got.value - want.value) <=
          1e-7 * (1.0 + std::abs(want.value)));
  }
}

TEST_CASE("polytope solver tracks row additions and removals") {
  PolytopeSolver solver(2);
  // Box [-1,1]^2.
  int top = solver.add_row((Vec(2) << 0, 1).finished(), 1.0);
  solver.add_row((Vec(2) << 0, -1).finished(), 1.0);
  solver.add_row((Vec(2) << 1, 0).finished(), 1.0);
  solver.add_row((Vec(2) << -1, 0).finished(), 1.0);
  Vec up = (Vec(2) << 0, 1).finished();

  CHECK(solver.maximize(up).value == doctest::Approx(1.0));
  // Cutting row tightens the optimum; warm state must adapt.
  int cut = solver.add_row(up, 0.5);
  CHECK(solver.maximize(up).value == doctest::Approx(0.5));
  // Removing it restores the old optimum.
  solver.remove_row(cut);
  CHECK(solver.maximize(up).value == doctest::Approx(1.0));
  // Excluding the only binding row unbounds that direction.
  PolytopeSolver::Result rel = solver.maximize(up, top);
  CHECK(rel.status == LpStatus::Unbounded);
  // A duplicate makes the exclusion bounded again (redundancy pattern).
  solver.add_row(up, 1.0);
  rel = solver.maximize(up, top);
  REQUIRE(rel.status == LpStatus::Optimal);
  CHECK(rel.value == doctest::Approx(1.0));
}

TEST_CASE("warm state survives an exclusion solve that left the row violated") {
  PolytopeSolver solver(2);
  solver.add_row((Vec(2) << 1, 0).finished(), 1.0);
  solver.add_row((Vec(2) << -1, 0).finished(), 0.0);
  solver.add_row((Vec(2) << 0, 1).finished(), 1.0);
  solver.add_row((Vec(2) << 0, -1).finished(), 0.0);
  int tight = solver.add_row((Vec(2) << 1, 1).finished(), 1.0);  // diagonal cut

  Vec diag = (Vec(2) << 1, 1).finished();
  REQUIRE(solver.maximize(diag).value == doctest::Approx(1.0));
  // Relaxing the diagonal moves the vertex to (1,1), violating the live row.
  PolytopeSolver::Result rel = solver.maximize(diag, tight);
  REQUIRE(rel.status == LpStatus::Optimal);
  CHECK(rel.value == doctest::Approx(2.0));
  // The next non-excluding solve must return to the true optimum.
  PolytopeSolver::Result back = solver.maximize(diag);
  REQUIRE(back.status == LpStatus::Optimal);
  CHECK(back.value == doctest::Approx(1.0));
  // And a different objective from that state stays consistent too.
  Vec right = (Vec(2) << 1, 0).finished();
  CHECK(solver.maximize(right).value == doctest::Approx(1.0));
}

TEST_CASE("randomized add/remove/maximize torture against cold oracle") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> rhs(0.3, 2.0);
  const int d = 3;
  PolytopeSolver solver(d);
  std::vector<int> ids;
  // Permanent box keeps everything bounded.
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e(i) = 1.0;
    solver.add_row(e, 4.0);
    solver.add_row(-e, 4.0);
  }
  for (int step = 0; step < 300; ++step) {
    double dice = coef(rng);
    if (dice < -0.3 || ids.empty()) {
      Vec row(d);
      for (int j = 0; j < d; ++j) row(j) = coef(rng);
      ids.push_back(solver.add_row(row, rhs(rng)));
    } else if (dice < 0.0) {
      size_t at = static_cast<size_t>((coef(rng) + 1.0) / 2.0 * ids.size());
      at = std::min(at, ids.size() - 1);
      solver.remove_row(ids[at]);
      ids.erase(ids.begin() + static_cast<long>(at));
    }
    Vec c(d);
    for (int j = 0; j < d; ++j) c(j) = coef(rng);
    PolytopeSolver::Result got = solver.maximize(c);
    // Cold reference over the live rows.
    LinearProgram ref;
    ref.c = c;
    std::vector<int> live;
    for (int id = 0; id < solver.row_count(); ++id)
      if (solver.alive(id)) live.push_back(id);
    ref.G.resize(live.size(), d);
    ref.g.resize(live.size());
    for (size_t k = 0; k < live.size(); ++k) {
      ref.G.row(k) = solver.row(live[k]).transpose();
      ref.g(k) = solver.rhs(live[k]);
    }
    LpOutcome want = solve_lp(ref);
    REQUIRE(want.status == LpStatus::Optimal);
    REQUIRE(got.status == LpStatus::Optimal);
    CHECK(std::abs(got.value - want.value) <=
          1e-6 * (1.0 + std::abs(want.value)));
  }
}
