#include "rgov/moas.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace rgov {
namespace {

// max over the box of r'd.
double box_support(const Vec& r, const Box& box) {
  double s = 0.0;
  for (int j = 0; j < box.size(); ++j)
    s += r(j) >= 0.0 ? r(j) * box.upper(j) : r(j) * box.lower(j);
  return s;
}

struct Interval {
  double lo = 1.0;
  double hi = 1.0;
};

Interval interval_mul(const Interval& a, const Interval& b) {
  double c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo,
         c4 = a.hi * b.hi;
  return {std::min(std::min(c1, c2), std::min(c3, c4)),
          std::max(std::max(c1, c2), std::max(c3, c4))};
}

// [lo, hi]^e with the even-power rule (a straddling interval squares to
// something touching zero, not the naive corner product).
Interval interval_pow(double lo, double hi, int e) {
  if (e == 0) return {1.0, 1.0};
  double a = std::pow(lo, e), b = std::pow(hi, e);
  if (e % 2 != 0) return {a, b};
  Interval r{std::min(a, b), std::max(a, b)};
  if (lo <= 0.0 && hi >= 0.0) r.lo = 0.0;
  return r;
}

Interval monomial_interval(const Monomial& mono, const Box& box) {
  Interval acc;
  for (int v = 0; v < static_cast<int>(mono.exponents.size()); ++v) {
    int e = mono.exponents[v];
    if (e == 0) continue;
    acc = interval_mul(acc, interval_pow(box.lower(v), box.upper(v), e));
  }
  return acc;
}

bool exactly_equal(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return false;
  return true;
}

}  // namespace

bool Polytope::contains(const Vec& z, double tol) const {
  if (z.size() != dim())
    throw Error(ErrorCode::InvalidArgument, "contains: point dimension mismatch");
  if (rows() == 0) return true;
  return (G * z - g).maxCoeff() <= tol;
}

bool is_redundant(const Vec& coeff, double rhs, const Polytope& poly,
                  double tol) {
  if (coeff.lpNorm<Eigen::Infinity>() == 0.0) return rhs >= -tol;
  LinearProgram lp{coeff, poly.G, poly.g};
  LpOutcome out = solve_lp(lp);
  switch (out.status) {
    case LpStatus::Optimal:
      return out.value <= rhs + tol;
    case LpStatus::Unbounded:
      return false;
    case LpStatus::Infeasible:
      return true;  // vacuous over an empty set
    default:
      throw Error(ErrorCode::NumericalFailure, "redundancy LP did not converge");
  }
}

MoasResult compute_moas(const Mat& Phi, const Mat& Phi_w,
                        const std::vector<LinearRow>& base_rows,
                        const Box& dist_box, const MoasOptions& opt,
                        const std::string& ordering) {
  const int d = static_cast<int>(Phi.rows());
  if (Phi.cols() != d)
    throw Error(ErrorCode::InvalidArgument, "compute_moas: Phi must be square");
  if (Phi_w.rows() != d)
    throw Error(ErrorCode::InvalidArgument, "compute_moas: Phi_w row mismatch");
  if (dist_box.size() != Phi_w.cols())
    throw Error(ErrorCode::InvalidArgument,
                "compute_moas: disturbance box does not match Phi_w columns");
  if (base_rows.empty())
    throw Error(ErrorCode::InvalidArgument, "compute_moas: no base rows");
  for (const LinearRow& r : base_rows)
    if (r.coeff.size() != d)
      throw Error(ErrorCode::InvalidArgument, "compute_moas: row dimension mismatch");

  // Exact duplicates (e.g. a theta-free constraint instantiated at every
  // theta vertex) would replay identical LPs at every t; keep the first.
  std::vector<LinearRow> base;
  base.reserve(base_rows.size());
  for (const LinearRow& r : base_rows) {
    bool dup = false;
    for (const LinearRow& b : base)
      if (b.rhs == r.rhs && exactly_equal(b.coeff, r.coeff)) { dup = true; break; }
    if (!dup) base.push_back(r);
  }
  const int nb = static_cast<int>(base.size());

  double eps = opt.eps;
  if (std::isnan(eps)) {
    const bool zero_dist = dist_box.size() == 0 || dist_box.is_zero();
    double hmax = 0.0;
    for (const LinearRow& r : base) hmax = std::max(hmax, r.rhs);
    eps = zero_dist ? 0.0 : 1e-6 * hmax;
  }
  if (eps < 0.0 || !std::isfinite(eps))
    throw Error(ErrorCode::InvalidArgument, "compute_moas: eps must be finite and >= 0");

  PolytopeSolver solver(d);
  std::vector<RowTag> tags;  // parallel to solver row ids

  auto tightened = [&](int t) {
    std::ostringstream os;
    os << "constraint tightening empties the admissible set at t=" << t;
    return Error(ErrorCode::TightenedInfeasible, os.str());
  };

  // Time-0 batch goes in wholesale; redundancy inside it is resolved by the
  // final pass.
  for (int i = 0; i < nb; ++i) {
    if (base[i].coeff.lpNorm<Eigen::Infinity>() == 0.0) {
      if (base[i].rhs < -opt.row_tol) throw tightened(0);
      continue;
    }
    solver.add_row(base[i].coeff, base[i].rhs);
    tags.push_back({base[i].constraint, 0, base[i].vertex});
  }

  Mat cur(nb, d);  // row i holds base_i' Phi^t
  Vec acc = Vec::Zero(nb);  // accumulated disturbance support per base row
  for (int i = 0; i < nb; ++i) cur.row(i) = base[i].coeff.transpose();
  const bool has_dist = Phi_w.cols() > 0;

  int t_star = -1;
  Mat cert_coeff;  // terminating candidate batch, re-verified after pruning
  Vec cert_rhs;

  for (int t = 1; t <= opt.iteration_cap; ++t) {
    if (has_dist)
      for (int i = 0; i < nb; ++i)
        acc(i) += box_support((cur.row(i) * Phi_w).transpose(), dist_box);
    cur = cur * Phi;

    bool all_redundant = true;
    std::vector<int> keep;
    Vec rhs_t(nb);
    for (int i = 0; i < nb; ++i) {
      rhs_t(i) = base[i].rhs - acc(i) - eps;
      Vec coeff = cur.row(i).transpose();
      if (coeff.lpNorm<Eigen::Infinity>() == 0.0) {
        if (rhs_t(i) < -opt.row_tol) throw tightened(t);
        continue;
      }
      PolytopeSolver::Result res = solver.maximize(coeff);
      if (res.status == LpStatus::Infeasible) throw tightened(t);
      if (res.status == LpStatus::Degenerate)
        throw Error(ErrorCode::NumericalFailure,
                    "redundancy LP did not converge during set construction");
      const bool redundant =
          res.status == LpStatus::Optimal && res.value <= rhs_t(i) + opt.row_tol;
      if (!redundant) {
        all_redundant = false;
        keep.push_back(i);
      }
    }
    if (all_redundant) {
      t_star = t - 1;
      cert_coeff = cur;
      cert_rhs = rhs_t;
      break;
    }
    for (int i : keep) {
      solver.add_row(cur.row(i).transpose(), rhs_t(i));
      tags.push_back({base[i].constraint, t, base[i].vertex});
    }
  }
  if (t_star < 0)
    throw Error(ErrorCode::NotFinitelyDetermined,
                "admissible set not finitely determined within the iteration cap");

  int rows_before = 0;
  for (int id = 0; id < solver.row_count(); ++id)
    if (solver.alive(id)) ++rows_before;

  // Final full pass.  Exact duplicates go first: the strict-interior LP test
  // below keeps both members of a pair (each supports the other at exactly
  // its bound).  Deterministic: lowest id survives.
  for (int id = 0; id < solver.row_count(); ++id) {
    if (!solver.alive(id)) continue;
    for (int jd = id + 1; jd < solver.row_count(); ++jd) {
      if (!solver.alive(jd)) continue;
      if (solver.rhs(jd) == solver.rhs(id) &&
          (solver.row(jd) - solver.row(id)).lpNorm<Eigen::Infinity>() == 0.0)
        solver.remove_row(jd);
    }
  }

  // Drop a row only when its support over the other rows sits strictly below
  // its bound.  Removing at-tolerance rows can delete genuine faces, and the
  // resulting enlargement compounds over hundreds of removals until the
  // stopping certificate no longer holds; strictly interior rows are truly
  // redundant, so removal leaves the set itself unchanged.
  for (int id = 0; id < solver.row_count(); ++id) {
    if (!solver.alive(id)) continue;
    PolytopeSolver::Result res = solver.maximize(solver.row(id), id);
    if (res.status == LpStatus::Infeasible) throw tightened(t_star);
    if (res.status == LpStatus::Degenerate)
      throw Error(ErrorCode::NumericalFailure,
                  "redundancy LP did not converge during the final pass");
    if (res.status == LpStatus::Optimal &&
        res.value <= solver.rhs(id) - opt.row_tol)
      solver.remove_row(id);
  }

  MoasResult result;
  result.t_star = t_star;
  result.iterations = t_star;
  result.rows_before = rows_before;

  int live = 0;
  for (int id = 0; id < solver.row_count(); ++id)
    if (solver.alive(id)) ++live;
  result.rows_after = live;
  result.polytope.G.resize(live, d);
  result.polytope.g.resize(live);
  result.polytope.tags.reserve(live);
  result.polytope.ordering = ordering;
  int k = 0;
  for (int id = 0; id < solver.row_count(); ++id) {
    if (!solver.alive(id)) continue;
    result.polytope.G.row(k) = solver.row(id).transpose();
    result.polytope.g(k) = solver.rhs(id);
    result.polytope.tags.push_back(tags[id]);
    ++k;
  }

  // Stopping certificate must survive pruning: every terminating candidate
  // stays redundant over the pruned set.  Pruning only removed strictly
  // interior rows, so the extra slack covers LP measurement noise alone.
  const double cert_tol = 10.0 * opt.row_tol;
  for (int i = 0; i < nb; ++i) {
    Vec coeff = cert_coeff.row(i).transpose();
    if (coeff.lpNorm<Eigen::Infinity>() == 0.0) continue;  // checked above
    PolytopeSolver::Result res = solver.maximize(coeff);
    if (res.status == LpStatus::Infeasible) throw tightened(t_star);
    if (res.status != LpStatus::Optimal || res.value > cert_rhs(i) + cert_tol)
      throw Error(ErrorCode::NumericalFailure,
                  "finite-determination certificate failed after redundancy removal");
  }

  return result;
}

MoasResult compute_linear_moas(const Mat& phi11, const Mat& phi10,
                               const std::vector<LinearRow>& rows,
                               const Box& w_box, const MoasOptions& opt) {
  std::ostringstream os;
  os << "glexd;n=" << phi11.rows() << ";p=1";
  return compute_moas(phi11, phi10, rows, w_box, opt, os.str());
}

MoasResult compute_robust_moas(const ExtendedSystem& ext,
                               const std::vector<LinearRow>& vertex_rows,
                               const std::vector<LinearRow>& state_box_rows,
                               const Box& omega, const MoasOptions& opt) {
  std::vector<LinearRow> base = vertex_rows;
  base.insert(base.end(), state_box_rows.begin(), state_box_rows.end());
  return compute_moas(ext.Phi, ext.Phi_w, base, omega, opt, ext.ordering_id());
}

Box extract_box(const Polytope& poly) {
  const int d = poly.dim();
  Box box;
  box.lower = Vec(d);
  box.upper = Vec(d);
  LinearProgram lp;
  lp.G = poly.G;
  lp.g = poly.g;
  for (int i = 0; i < d; ++i) {
    for (int sign : {+1, -1}) {
      lp.c = Vec::Zero(d);
      lp.c(i) = sign;
      LpOutcome out = solve_lp(lp);
      if (out.status == LpStatus::Unbounded) {
        std::ostringstream os;
        os << "coordinate " << i << " is unbounded "
           << (sign > 0 ? "above" : "below");
        throw Error(ErrorCode::UnboundedCoordinate, os.str());
      }
      if (out.status == LpStatus::Infeasible)
        throw Error(ErrorCode::TightenedInfeasible, "polytope is empty");
      if (out.status != LpStatus::Optimal)
        throw Error(ErrorCode::NumericalFailure, "bound LP did not converge");
      if (sign > 0)
        box.upper(i) = out.value;
      else
        box.lower(i) = -out.value;
    }
  }
  return box;
}

Box lift_box(const Box& x_box, const ExtendedSystem& ext) {
  if (x_box.size() != ext.n)
    throw Error(ErrorCode::InvalidArgument, "lift_box: box dimension mismatch");
  Box out;
  out.lower = Vec(ext.dim());
  out.upper = Vec(ext.dim());
  for (int j = 1; j <= ext.p; ++j) {
    const PowerBasis& basis = ext.x_bases[j - 1];
    for (int m = 0; m < basis.size(); ++m) {
      Interval iv = monomial_interval(basis.monomials[m], x_box);
      out.lower(ext.x_offset[j - 1] + m) = iv.lo;
      out.upper(ext.x_offset[j - 1] + m) = iv.hi;
    }
  }
  return out;
}

Box omega_w(const Box& x_box, const Box& w_box, const ExtendedSystem& ext) {
  if (x_box.size() != ext.n || w_box.size() != ext.nw)
    throw Error(ErrorCode::InvalidArgument, "omega_w: box dimension mismatch");
  Box out;
  out.lower = Vec(ext.dist_dim());
  out.upper = Vec(ext.dist_dim());
  for (size_t b = 0; b < ext.dist_layout.size(); ++b) {
    const auto [i, q] = ext.dist_layout[b];
    const int sw = static_cast<int>(ext.w_bases[q].size());
    const int sx = i == 0 ? 1 : static_cast<int>(ext.x_bases[i - 1].size());
    for (int mx = 0; mx < sx; ++mx) {
      Interval ix;  // neutral [1,1] when i == 0
      if (i > 0) ix = monomial_interval(ext.x_bases[i - 1].monomials[mx], x_box);
      for (int mw = 0; mw < sw; ++mw) {
        Interval iw = monomial_interval(ext.w_bases[q].monomials[mw], w_box);
        Interval iv = interval_mul(ix, iw);
        const int at = ext.dist_offset[b] + mx * sw + mw;
        out.lower(at) = iv.lo;
        out.upper(at) = iv.hi;
      }
    }
  }
  return out;
}

std::vector<LinearRow> box_rows(const Box& box, int first_id) {
  std::vector<LinearRow> rows;
  rows.reserve(2 * box.size());
  for (int i = 0; i < box.size(); ++i) {
    LinearRow up;
    up.coeff = Vec::Zero(box.size());
    up.coeff(i) = 1.0;
    up.rhs = box.upper(i);
    up.constraint = first_id + 2 * i;
    rows.push_back(up);
    LinearRow lo;
    lo.coeff = Vec::Zero(box.size());
    lo.coeff(i) = -1.0;
    lo.rhs = -box.lower(i);
    lo.constraint = first_id + 2 * i + 1;
    rows.push_back(lo);
  }
  return rows;
}

// ============================================================================
// Text round-trip
// ============================================================================

void save_polytope(const std::filesystem::path& path, const Polytope& poly) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::InvalidArgument,
                "cannot open for writing: " + path.string());
  out << "polytope v1\n";
  out << "dim " << poly.dim() << "\n";
  out << "ordering " << (poly.ordering.empty() ? "-" : poly.ordering) << "\n";
  out << "rows " << poly.rows() << "\n";
  char buf[64];
  for (int i = 0; i < poly.rows(); ++i) {
    for (int j = 0; j < poly.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", poly.G(i, j));
      out << buf << (j + 1 == poly.dim() ? "" : " ");
    }
    std::snprintf(buf, sizeof buf, "%.17g", poly.g(i));
    const RowTag tag = i < static_cast<int>(poly.tags.size()) ? poly.tags[i]
                                                              : RowTag{};
    out << " | " << buf << " | " << tag.constraint << "," << tag.t << ","
        << tag.vertex << "\n";
  }
  if (!out)
    throw Error(ErrorCode::NumericalFailure, "write failed: " + path.string());
}

Polytope load_polytope(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::InvalidArgument,
                "cannot open for reading: " + path.string());
  auto bad = [&](const std::string& what) {
    return Error(ErrorCode::InvalidArgument,
                 "malformed polytope file " + path.string() + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "polytope v1") throw bad("header");
  std::string key;
  int d = 0, m = 0;
  std::string ordering;
  if (!(in >> key >> d) || key != "dim" || d < 1) throw bad("dim");
  if (!(in >> key >> ordering) || key != "ordering") throw bad("ordering");
  if (!(in >> key >> m) || key != "rows" || m < 0) throw bad("rows");
  Polytope poly;
  poly.ordering = ordering == "-" ? "" : ordering;
  poly.G.resize(m, d);
  poly.g.resize(m);
  poly.tags.resize(m);
  std::string tok;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) {
      if (!(in >> tok)) throw bad("row coefficients");
      char* end = nullptr;
      poly.G(i, j) = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') throw bad("coefficient token");
    }
    if (!(in >> tok) || tok != "|") throw bad("separator");
    if (!(in >> tok)) throw bad("rhs");
    char* end = nullptr;
    poly.g(i) = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw bad("rhs token");
    if (!(in >> tok) || tok != "|") throw bad("separator");
    if (!(in >> tok)) throw bad("tag");
    RowTag tag;
    if (std::sscanf(tok.c_str(), "%d,%d,%d", &tag.constraint, &tag.t,
                    &tag.vertex) != 3)
      throw bad("tag token");
    poly.tags[i] = tag;
  }
  return poly;
}

}  // namespace rgov
