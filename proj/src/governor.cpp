#include "rgov/governor.hpp"

#include <algorithm>
#include <cmath>

#include "rgov/lp.hpp"

namespace rgov {
namespace {

constexpr double kMemberTol = 1e-7;
constexpr double kScalarTol = 1e-9;

void check_ordering(const Polytope& moas, const LiftingMap& lift) {
  if (!moas.ordering.empty() && moas.ordering != lift.ordering)
    throw Error(ErrorCode::InvalidArgument,
                "polytope ordering '" + moas.ordering +
                    "' does not match lifting map '" + lift.ordering + "'");
  if (moas.dim() != lift.dim())
    throw Error(ErrorCode::InvalidArgument,
                "polytope dimension does not match lifting map");
}

bool member(const Polytope& moas, const LiftingMap& lift, const Vec& x,
            const Vec& v, double tol) {
  return moas.contains(lift.embed(x, v), tol);
}

// Scan window along +/- e_i: the polytope's own extent when finite, else a
// fallback radius scaled to the query state (the set may be unbounded along
// the reference coordinate even though every slice of interest is not).
double scan_bound(const Polytope& poly, int i, int sign, double fallback) {
  LinearProgram lp;
  lp.G = poly.G;
  lp.g = poly.g;
  lp.c = Vec::Zero(poly.dim());
  lp.c(i) = sign;
  LpOutcome out = solve_lp(lp);
  if (out.status == LpStatus::Optimal) return sign * out.value;
  if (out.status == LpStatus::Unbounded) return sign * fallback;
  if (out.status == LpStatus::Infeasible)
    throw Error(ErrorCode::InadmissibleInitialState,
                "the admissible set is empty");
  throw Error(ErrorCode::NumericalFailure,
              "reference range LP did not converge");
}

}  // namespace

int LiftingMap::dim() const {
  return offsets.empty() ? 0
                         : offsets.back() + static_cast<int>(bases.back().size());
}

Vec LiftingMap::embed(const Vec& x, const Vec& v) const {
  if (x.size() != nx || v.size() != nv)
    throw Error(ErrorCode::InvalidArgument, "embed: dimension mismatch");
  Vec x_v(n());
  x_v.head(nx) = x;
  x_v.tail(nv) = v;
  Vec X(dim());
  for (int j = 1; j <= p; ++j)
    X.segment(offsets[j - 1], bases[j - 1].size()) =
        eval_power(x_v, bases[j - 1]);
  return X;
}

LiftingMap make_lifting_map(int nx, int nv, int p) {
  if (nx < 0 || nv < 0 || nx + nv < 1 || p < 1)
    throw Error(ErrorCode::InvalidArgument, "make_lifting_map: bad dimensions");
  LiftingMap map;
  map.nx = nx;
  map.nv = nv;
  map.p = p;
  int off = 0;
  for (int j = 1; j <= p; ++j) {
    map.bases.push_back(power_basis(nx + nv, j));
    map.offsets.push_back(off);
    off += static_cast<int>(map.bases.back().size());
  }
  map.ordering =
      "glexd;n=" + std::to_string(nx + nv) + ";p=" + std::to_string(p);
  return map;
}

GovernorState make_governor(Polytope moas, LiftingMap lift, double beta,
                            int bisection_depth) {
  if (!(beta > 0.0 && beta < 1.0))
    throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 1)");
  if (bisection_depth < 1)
    throw Error(ErrorCode::InvalidArgument, "bisection depth must be >= 1");
  check_ordering(moas, lift);
  GovernorState s;
  s.moas = std::move(moas);
  s.lift = std::move(lift);
  s.beta = beta;
  s.bisection_depth = bisection_depth;
  return s;
}

bool admissible(const GovernorState& s, const Vec& x, const Vec& v,
                double tol) {
  return member(s.moas, s.lift, x, v, tol);
}

Vec init_reference(const Vec& x0, const Polytope& moas, const LiftingMap& lift,
                   const Box* v_box) {
  check_ordering(moas, lift);
  const int nv = lift.nv;
  Vec zero = Vec::Zero(nv);
  if (member(moas, lift, x0, zero, kMemberTol)) return zero;

  auto feasible = [&](const Vec& v) {
    return member(moas, lift, x0, v, kMemberTol);
  };

  if (nv == 1) {
    // The v coordinate sits right after the x block in the degree-1 slice.
    const double fallback = 10.0 * (1.0 + x0.lpNorm<Eigen::Infinity>());
    const double vhi = scan_bound(moas, lift.nx, +1, fallback);
    const double vlo = scan_bound(moas, lift.nx, -1, fallback);
    const int grid = 256;
    double best = std::numeric_limits<double>::infinity();
    double best_v = 0.0;
    for (double bound : {vhi, vlo}) {
      if (bound == 0.0) continue;
      // Outward scan for the first feasible magnitude on this sign.
      int hit = -1;
      for (int j = 1; j <= grid; ++j) {
        Vec v(1);
        v(0) = bound * j / grid;
        if (feasible(v)) { hit = j; break; }
      }
      if (hit < 0) continue;
      // Bisect between the last infeasible and first feasible magnitudes;
      // the feasible endpoint is kept, so the result is always admissible.
      double lo = bound * (hit - 1) / grid;  // infeasible (or v = 0)
      double hi = bound * hit / grid;        // feasible
      int guard = 0;
      while (std::abs(hi - lo) > kScalarTol && ++guard < 200) {
        double mid = 0.5 * (lo + hi);
        Vec v(1);
        v(0) = mid;
        if (feasible(v)) hi = mid; else lo = mid;
      }
      if (std::abs(hi) < best) {
        best = std::abs(hi);
        best_v = hi;
      }
    }
    if (!std::isfinite(best))
      throw Error(ErrorCode::InadmissibleInitialState,
                  "no admissible initial reference exists for this state");
    Vec v(1);
    v(0) = best_v;
    return v;
  }

  // Vector reference: feasible start from a coarse grid over the declared
  // box, then per-coordinate shrink toward zero.
  if (v_box == nullptr || v_box->size() != nv)
    throw Error(ErrorCode::InvalidArgument,
                "init_reference needs a v-box for vector references");
  const int per_dim = 9;
  std::vector<int> idx(nv, 0);
  double best = std::numeric_limits<double>::infinity();
  Vec best_v;
  while (true) {
    Vec v(nv);
    for (int i = 0; i < nv; ++i) {
      double a = v_box->lower(i), b = v_box->upper(i);
      v(i) = a + (b - a) * idx[i] / (per_dim - 1);
    }
    if (v.norm() < best && feasible(v)) {
      best = v.norm();
      best_v = v;
    }
    int i = 0;
    while (i < nv && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == nv) break;
  }
  if (!best_v.size())
    throw Error(ErrorCode::InadmissibleInitialState,
                "no admissible initial reference exists for this state");
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int i = 0; i < nv; ++i) {
      // Shrink coordinate i toward zero while staying feasible.
      double lo = 0.0, hi = best_v(i);
      Vec probe = best_v;
      probe(i) = 0.0;
      if (feasible(probe)) { best_v(i) = 0.0; continue; }
      int guard = 0;
      while (std::abs(hi - lo) > kScalarTol && ++guard < 200) {
        double mid = 0.5 * (lo + hi);
        probe(i) = mid;
        if (feasible(probe)) hi = mid; else lo = mid;
      }
      best_v(i) = hi;
    }
  }
  return best_v;
}

void initialize(GovernorState& state, const Vec& x0, const Box* v_box) {
  state.v = init_reference(x0, state.moas, state.lift, v_box);
  state.margin_exhausted = false;
  state.last_lambda = 0.0;
}

Vec update(GovernorState& state, const Vec& x) {
  if (state.v.size() != state.lift.nv)
    throw Error(ErrorCode::InvalidArgument,
                "governor not initialized (call initialize first)");
  const Vec decayed = state.beta * state.v;

  // lambda = 1 drops the reference to zero outright when admissible.
  Vec zero = Vec::Zero(state.lift.nv);
  if (member(state.moas, state.lift, x, zero, kMemberTol)) {
    state.last_lambda = 1.0;
    state.v = zero;
    return state.v;
  }
  // lambda = 0 must be admissible in-model; when it is not, hold the
  // decayed reference and latch the warning.
  if (!member(state.moas, state.lift, x, decayed, kMemberTol)) {
    state.last_lambda = 0.0;
    state.margin_exhausted = true;
    state.v = decayed;
    return state.v;
  }

  double lo = 0.0;  // always kept admissible
  double hi = 1.0;  // known inadmissible
  for (int i = 0; i < state.bisection_depth; ++i) {
    double mid = 0.5 * (lo + hi);
    if (member(state.moas, state.lift, x, (1.0 - mid) * decayed, kMemberTol))
      lo = mid;
    else
      hi = mid;
  }
  state.last_lambda = lo;
  state.v = (1.0 - lo) * decayed;
  return state.v;
}

}  // namespace rgov
