#include "rgov/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rgov {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct DualSimplex {
  // Scaled data: rows of G and g divided by row inf-norms, c by its inf-norm.
  Mat Gs;        // m x d
  Vec gs;        // m
  Vec cs;        // d
  int m, d;
  std::vector<int> art_sign;

  std::vector<int> basis;      // d column ids; real columns are [0, m)
  std::vector<char> in_basis;  // over real columns
  Vec xB;
  Eigen::PartialPivLU<Mat> lu;
  int pivots = 0;
  bool bland = false;
  bool bland_locked = false;  // retry attempts keep Bland's rule throughout
  int stall = 0;

  bool is_art(int col) const { return col >= m; }

  Vec column(int col) const {
    if (!is_art(col)) return Gs.row(col).transpose();
    Vec e = Vec::Zero(d);
    e(col - m) = art_sign[col - m];
    return e;
  }

  void refactor() {
    Mat B(d, d);
    for (int k = 0; k < d; ++k) B.col(k) = column(basis[k]);
    lu.compute(B);
  }

  Vec phase_costs(bool phase1) const {
    Vec cost(m + d);
    if (phase1) {
      cost.head(m).setZero();
      cost.tail(d).setOnes();
    } else {
      cost.head(m) = gs;
      cost.tail(d).setZero();
    }
    return cost;
  }

  // Runs the minimizing simplex for one phase.  Returns false when the
  // problem of that phase is unbounded below (only possible in phase 2,
  // where it means the primal is infeasible).  Throws nothing; the caller
  // inspects `pivots` against the cap.
  enum class PhaseEnd { Converged, UnboundedBelow, IterationCap };

  PhaseEnd run(bool phase1, int cap) {
    Vec cost = phase_costs(phase1);
    double last_obj = kInf;
    while (pivots < cap) {
      Vec costB(d);
      for (int k = 0; k < d; ++k) costB(k) = cost(basis[k]);
      Vec pi = lu.transpose().solve(costB);
      // Pricing over nonbasic real columns (artificials never re-enter).
      Vec red = cost.head(m) - Gs * pi;
      int enter = -1;
      double best = -kPivotTol;
      for (int i = 0; i < m; ++i) {
        if (in_basis[i]) continue;
        double r = red(i);
        if (r < -kPivotTol) {
          if (bland) { enter = i; break; }
          if (r < best) { best = r; enter = i; }
        }
      }
      if (enter < 0) return PhaseEnd::Converged;

      Vec u = lu.solve(column(enter));
      int leave = -1;
      double theta = kInf;
      if (bland) {
        // Exact minimum ratio with lowest-index ties: the anti-cycling
        // guarantee of Bland's rule needs the textbook selection.
        for (int k = 0; k < d; ++k) {
          if (u(k) > kPivotTol) {
            double ratio = xB(k) / u(k);
            if (ratio < theta - 1e-12 ||
                (ratio < theta + 1e-12 && leave >= 0 &&
                 basis[k] < basis[leave])) {
              theta = ratio;
              leave = k;
            }
          }
        }
        if (leave < 0)
          return phase1 ? PhaseEnd::IterationCap : PhaseEnd::UnboundedBelow;
      } else {
        // Two-pass ratio test: tightest ratio under a small feasibility
        // relaxation, then the largest pivot element among the near-tied
        // blocking rows.  Tiny pivots are what drive the basis singular;
        // magnitude-first selection keeps it well conditioned while staying
        // deterministic (ties resolve to the lowest column id).
        for (int k = 0; k < d; ++k)
          if (u(k) > kPivotTol)
            theta = std::min(theta, (xB(k) + 1e-9) / u(k));
        if (theta == kInf)
          return phase1 ? PhaseEnd::IterationCap : PhaseEnd::UnboundedBelow;
        double best_u = 0.0;
        for (int k = 0; k < d; ++k) {
          if (u(k) <= kPivotTol || xB(k) / u(k) > theta) continue;
          if (u(k) > best_u * (1.0 + 1e-12) ||
              (u(k) > best_u * (1.0 - 1e-12) && leave >= 0 &&
               basis[k] < basis[leave])) {
            best_u = u(k);
            leave = k;
          }
        }
        if (leave < 0)
          return phase1 ? PhaseEnd::IterationCap : PhaseEnd::UnboundedBelow;
        theta = std::max(xB(leave) / u(leave), 0.0);
      }

      xB -= theta * u;
      xB(leave) = theta;
      for (int k = 0; k < d; ++k) xB(k) = std::max(xB(k), 0.0);
      if (!is_art(basis[leave])) in_basis[basis[leave]] = 0;
      if (!is_art(enter)) in_basis[enter] = 1;
      basis[leave] = enter;
      refactor();
      ++pivots;

      double obj = 0.0;
      for (int k = 0; k < d; ++k) obj += cost(basis[k]) * xB(k);
      if (obj < last_obj - 1e-13 * (1.0 + std::abs(last_obj))) {
        stall = 0;
        if (!bland_locked) bland = false;
      } else if (++stall > 40) {
        bland = true;
      }
      last_obj = obj;
    }
    return PhaseEnd::IterationCap;
  }

  // Degenerate-at-zero artificials are swapped for any real column with a
  // usable pivot element; leftovers correspond to redundant equations and
  // stay basic at zero through phase 2.
  void drive_out_artificials() {
    for (int k = 0; k < d; ++k) {
      if (!is_art(basis[k]) || xB(k) > kPivotTol) continue;
      Vec ek = Vec::Zero(d);
      ek(k) = 1.0;
      Vec w = lu.transpose().solve(ek);
      Vec t = Gs * w;  // tableau row k over real columns
      for (int i = 0; i < m; ++i) {
        if (in_basis[i] || std::abs(t(i)) < 1e-7) continue;
        in_basis[i] = 1;
        basis[k] = i;
        xB(k) = 0.0;
        refactor();
        ++pivots;
        break;
      }
    }
  }
};

LpOutcome solve_impl(const LinearProgram& lp, bool classify);

// Distinguishes Unbounded from Infeasible once the dual turned out
// infeasible: the primal is feasible iff some z keeps all violations below
// zero, probed through an always-feasible bounded auxiliary program.
LpStatus classify_primal(const Mat& Gs, const Vec& gs) {
  int m = static_cast<int>(Gs.rows());
  int d = static_cast<int>(Gs.cols());
  LinearProgram aux;
  aux.c = Vec::Zero(d + 1);
  aux.c(d) = -1.0;
  aux.G = Mat::Zero(m + 1, d + 1);
  aux.G.topLeftCorner(m, d) = Gs;
  aux.G.col(d).head(m).setConstant(-1.0);
  aux.G(m, d) = -1.0;  // t >= -1 keeps the auxiliary bounded
  aux.g = Vec::Zero(m + 1);
  aux.g.head(m) = gs;
  aux.g(m) = 1.0;
  LpOutcome out = solve_impl(aux, false);
  if (out.status != LpStatus::Optimal) return LpStatus::Degenerate;
  return out.value >= -kFeasTol ? LpStatus::Unbounded : LpStatus::Infeasible;
}

LpOutcome solve_impl(const LinearProgram& lp, bool classify) {
  const int m = static_cast<int>(lp.G.rows());
  const int d = static_cast<int>(lp.G.cols());
  if (d < 1 || lp.c.size() != d || lp.g.size() != m)
    throw Error(ErrorCode::InvalidArgument, "solve_lp dimension mismatch");

  LpOutcome out;
  if (m == 0) {
    if (lp.c.lpNorm<Eigen::Infinity>() <= kPivotTol) {
      out.status = LpStatus::Optimal;
      out.value = 0.0;
      out.point = Vec::Zero(d);
    } else {
      out.status = LpStatus::Unbounded;
      out.value = kInf;
    }
    return out;
  }

  Mat Gs = lp.G;
  Vec gs = lp.g;
  for (int i = 0; i < m; ++i) {
    double sc = std::max(1.0, Gs.row(i).lpNorm<Eigen::Infinity>());
    Gs.row(i) /= sc;
    gs(i) /= sc;
  }
  // Normalize in both directions: candidate rows shrunk by many dynamics
  // applications otherwise start the dual from a vanishing artificial basis.
  double c_norm = lp.c.lpNorm<Eigen::Infinity>();
  Vec cs = lp.c / (c_norm > 0.0 ? c_norm : 1.0);

  auto attempt = [&](bool bland_start) -> LpOutcome {
    LpOutcome out;
    DualSimplex s;
    s.m = m;
    s.d = d;
    s.Gs = Gs;
    s.gs = gs;
    s.cs = cs;
    s.bland = bland_start;
    s.bland_locked = bland_start;

    s.art_sign.resize(d);
    s.basis.resize(d);
    s.in_basis.assign(m, 0);
    s.xB = Vec(d);
    for (int e = 0; e < d; ++e) {
      s.art_sign[e] = s.cs(e) >= 0.0 ? 1 : -1;
      s.basis[e] = m + e;
      s.xB(e) = std::abs(s.cs(e));
    }
    s.refactor();

    const int cap = std::min(50000, 2000 + 4 * m + 20 * d);

    auto end1 = s.run(true, cap);
    out.iterations = s.pivots;
    if (end1 == DualSimplex::PhaseEnd::IterationCap) return out;  // Degenerate
    double art_sum = 0.0;  // phase-1 objective: only artificial columns count
    for (int k = 0; k < d; ++k)
      if (s.is_art(s.basis[k])) art_sum += s.xB(k);
    if (art_sum > kFeasTol * (1.0 + s.cs.lpNorm<Eigen::Infinity>())) {
      // No y >= 0 solves G'y = c: the primal is unbounded or infeasible.
      out.status = classify ? classify_primal(s.Gs, s.gs) : LpStatus::Unbounded;
      out.value = out.status == LpStatus::Unbounded ? kInf : -kInf;
      return out;
    }
    s.drive_out_artificials();

    auto end2 = s.run(false, cap);
    out.iterations = s.pivots;
    if (end2 == DualSimplex::PhaseEnd::IterationCap) return out;
    if (end2 == DualSimplex::PhaseEnd::UnboundedBelow) {
      out.status = LpStatus::Infeasible;
      out.value = -kInf;
      return out;
    }

    // Residual artificials must sit at zero or the equation system was not
    // actually satisfied.
    for (int k = 0; k < d; ++k)
      if (s.is_art(s.basis[k]) && s.xB(k) > kFeasTol) return out;

    Vec costB(d);
    Vec cost = s.phase_costs(false);
    for (int k = 0; k < d; ++k) costB(k) = cost(s.basis[k]);
    Vec point = s.lu.transpose().solve(costB);

    double viol = (s.Gs * point - s.gs).maxCoeff();
    if (!point.allFinite() || viol > kFeasTol) return out;  // Degenerate

    out.status = LpStatus::Optimal;
    out.point = point;
    out.value = lp.c.dot(point);
    out.active_rows.clear();
    for (int k = 0; k < d; ++k)
      if (!s.is_art(s.basis[k])) out.active_rows.push_back(s.basis[k]);
    return out;
  };

  out = attempt(false);
  // A failed recovery is almost always a degenerate pivot sequence; one
  // retry under Bland's rule from the first pivot takes a different path
  // and stays deterministic.
  if (out.status == LpStatus::Degenerate) {
    int first_iters = out.iterations;
    out = attempt(true);
    out.iterations += first_iters;
  }
  return out;
}

}  // namespace

LpOutcome solve_lp(const LinearProgram& lp) { return solve_impl(lp, true); }

// ============================================================================
// PolytopeSolver
// ============================================================================

PolytopeSolver::PolytopeSolver(int dim) : dim_(dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "PolytopeSolver needs dim >= 1");
  G_.resize(64, dim_);
  g_.resize(64);
  gz_ = Vec::Zero(64);
}

int PolytopeSolver::add_row(const Vec& coeff, double rhs) {
  if (coeff.size() != dim_)
    throw Error(ErrorCode::InvalidArgument, "row dimension mismatch");
  if (count_ == G_.rows()) {
    G_.conservativeResize(2 * count_, dim_);
    g_.conservativeResize(2 * count_);
    gz_.conservativeResize(2 * count_);
  }
  G_.row(count_) = coeff.transpose();
  g_(count_) = rhs;
  alive_.push_back(1);
  if (warm_) {
    gz_(count_) = coeff.dot(z_);
    if (gz_(count_) > rhs + kFeasTol) warm_ = false;  // vertex got cut off
  }
  return count_++;
}

void PolytopeSolver::remove_row(int id) {
  alive_[id] = 0;
  if (warm_ &&
      std::find(active_.begin(), active_.end(), id) != active_.end())
    warm_ = false;
}

void PolytopeSolver::refresh_products() {
  gz_.head(count_) = G_.topRows(count_) * z_;
}

bool PolytopeSolver::seed_from(const LpOutcome& out,
                               const std::vector<int>& row_ids) {
  if (out.status != LpStatus::Optimal ||
      static_cast<int>(out.active_rows.size()) != dim_)
    return false;
  Mat B(dim_, dim_);
  std::vector<int> active(dim_);
  for (int k = 0; k < dim_; ++k) {
    active[k] = row_ids[out.active_rows[k]];
    B.row(k) = G_.row(active[k]);
  }
  Eigen::FullPivLU<Mat> lu(B);
  if (!lu.isInvertible()) return false;
  active_ = std::move(active);
  z_ = out.point;
  warm_ = true;
  refresh_products();
  return true;
}

PolytopeSolver::Result PolytopeSolver::cold_start(const Vec& c,
                                                  int exclude_row) {
  LinearProgram lp;
  lp.c = c;
  std::vector<int> row_ids;
  row_ids.reserve(count_);
  for (int i = 0; i < count_; ++i)
    if (alive_[i] && i != exclude_row) row_ids.push_back(i);
  lp.G.resize(row_ids.size(), dim_);
  lp.g.resize(row_ids.size());
  for (size_t k = 0; k < row_ids.size(); ++k) {
    lp.G.row(k) = G_.row(row_ids[k]);
    lp.g(k) = g_(row_ids[k]);
  }
  LpOutcome out = solve_lp(lp);
  Result r;
  r.status = out.status;
  r.value = out.value;
  r.pivots = out.iterations;
  warm_ = false;
  if (out.status == LpStatus::Optimal) seed_from(out, row_ids);
  return r;
}

PolytopeSolver::Result PolytopeSolver::maximize(const Vec& c,
                                                int exclude_row) {
  Result res = maximize_impl(c, exclude_row);
  // A solve that ignored a live row may end on a vertex violating it; such a
  // vertex must not seed the next (non-excluding) solve.
  if (warm_ && exclude_row >= 0 && exclude_row < count_ &&
      alive_[exclude_row] &&
      gz_(exclude_row) >
          g_(exclude_row) + kFeasTol * std::max(1.0, std::abs(g_(exclude_row))))
    warm_ = false;
  return res;
}

PolytopeSolver::Result PolytopeSolver::maximize_impl(const Vec& c,
                                                     int exclude_row) {
  if (c.size() != dim_)
    throw Error(ErrorCode::InvalidArgument, "objective dimension mismatch");
  if (!warm_) return cold_start(c, exclude_row);
  for (int id : active_)
    if (!alive_[id] || id == exclude_row) return cold_start(c, exclude_row);

  Result res;
  Mat B(dim_, dim_);
  for (int k = 0; k < dim_; ++k) B.row(k) = G_.row(active_[k]);
  Eigen::PartialPivLU<Mat> lu(B);

  const int cap = 400 + 4 * dim_;
  bool bland = false;
  int stall = 0;
  double last = -kInf;
  while (res.pivots < cap) {
    Vec lambda = lu.transpose().solve(c);
    int slot = -1;
    double best = -kPivotTol * (1.0 + c.lpNorm<Eigen::Infinity>());
    for (int k = 0; k < dim_; ++k) {
      if (lambda(k) < best) {
        if (bland) {
          if (slot < 0 || active_[k] < active_[slot]) slot = k;
        } else {
          best = lambda(k);
          slot = k;
        }
      }
    }
    if (slot < 0) {
      double value = c.dot(z_);
      // Report optimal only from a verified-feasible vertex.
      refresh_products();
      double viol = -kInf;
      for (int i = 0; i < count_; ++i)
        if (alive_[i] && i != exclude_row)
          viol = std::max(viol, (gz_(i) - g_(i)) /
                                    std::max(1.0, std::abs(g_(i))));
      if (viol > kFeasTol) return cold_start(c, exclude_row);
      res.status = LpStatus::Optimal;
      res.value = value;
      return res;
    }

    Vec ek = Vec::Zero(dim_);
    ek(slot) = 1.0;
    Vec dir = -lu.solve(ek);
    Vec gd = G_.topRows(count_) * dir;

    int block = -1;
    double step = kInf;
    for (int i = 0; i < count_; ++i) {
      if (!alive_[i] || i == exclude_row) continue;
      if (gd(i) <= kPivotTol) continue;
      bool in_active = false;
      for (int k = 0; k < dim_; ++k)
        if (active_[k] == i) { in_active = true; break; }
      if (in_active) continue;
      double ratio = (g_(i) - gz_(i)) / gd(i);
      // A measurable violation along an increasing direction means the warm
      // vertex is not actually feasible: the state is unusable.
      if (ratio < -kFeasTol) return cold_start(c, exclude_row);
      ratio = std::max(ratio, 0.0);
      // Strict improvement only: near-ties keep the earlier (lowest) row id.
      if (ratio < step - 1e-12) {
        step = ratio;
        block = i;
      }
    }
    // No blocking row is either genuine unboundedness or a corrupted basis
    // producing a spurious ray; only the verified full solve can tell.
    if (block < 0) return cold_start(c, exclude_row);

    z_ += step * dir;
    gz_.head(count_) += step * gd.head(count_);
    active_[slot] = block;
    B.row(slot) = G_.row(block);
    lu.compute(B);
    ++res.pivots;

    double obj = c.dot(z_);
    if (obj > last + 1e-13 * (1.0 + std::abs(last))) {
      stall = 0;
      bland = false;
    } else if (++stall > 30) {
      bland = true;
    }
    last = obj;
  }
  return cold_start(c, exclude_row);
}

}  // namespace rgov
