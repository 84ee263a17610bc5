#include "rgov/lift.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace rgov {
namespace {

void require(bool cond, const std::string& field, const std::string& msg) {
  if (!cond)
    throw Error(ErrorCode::InvalidArgument, "problem field '" + field + "': " + msg);
}

double spectral_radius(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

int PolyConstraint::max_degree() const {
  int deg = 0;
  for (const auto& [j, row] : c)
    if (row.lpNorm<Eigen::Infinity>() > 0.0) deg = std::max(deg, j);
  for (const auto& [j, row] : d)
    if (row.lpNorm<Eigen::Infinity>() > 0.0) deg = std::max(deg, j);
  return deg;
}

bool PolyConstraint::is_linear_certain() const {
  if (d0.size() > 0 && d0.lpNorm<Eigen::Infinity>() > 0.0) return false;
  for (const auto& [j, row] : d)
    if (row.lpNorm<Eigen::Infinity>() > 0.0) return false;
  for (const auto& [j, row] : c)
    if (j != 1 && row.lpNorm<Eigen::Infinity>() > 0.0) return false;
  return c.count(1) > 0;
}

void ProblemSpec::validate() const {
  require(A.rows() > 0 && A.rows() == A.cols(), "A", "must be square and nonempty");
  require(B.rows() == A.rows(), "B", "row count must match A");
  require(B.cols() > 0, "B", "needs at least one reference column");
  require(Bw.cols() == 0 || Bw.rows() == A.rows(), "Bw", "row count must match A");
  require(beta > 0.0 && beta < 1.0, "beta", "must lie in (0, 1)");
  require(degree >= 1, "degree", "must be >= 1");
  double rho = spectral_radius(A);
  require(rho < 1.0 - 1e-9, "A",
          "must be Schur stable (spectral radius " + std::to_string(rho) + ")");
  require(theta_box.lower.size() == theta_box.upper.size(), "theta_box",
          "lower/upper length mismatch");
  require(w_box.size() == nw(), "w_box", "length must match Bw columns");
  for (int k = 0; k < theta_box.size(); ++k)
    require(theta_box.lower(k) <= theta_box.upper(k), "theta_box",
            "lower exceeds upper at index " + std::to_string(k));
  for (int k = 0; k < w_box.size(); ++k)
    require(w_box.lower(k) <= w_box.upper(k), "w_box",
            "lower exceeds upper at index " + std::to_string(k));
  require(!constraints.empty(), "constraints", "at least one required");
  for (size_t i = 0; i < constraints.size(); ++i) {
    const auto& con = constraints[i];
    std::string who = "constraints[" + std::to_string(i) + "]";
    require(con.h >= 0.0, who + ".h", "must be nonnegative");
    require(con.d0.size() == 0 || con.d0.size() == ntheta(), who + ".d0",
            "length must match theta_box");
    for (const auto& [j, row] : con.c) {
      require(j >= 1 && j <= degree, who + ".c", "degree out of range");
      require(row.size() == sigma(n(), j), who + ".c",
              "row length must be sigma(n, j)");
    }
    for (const auto& [j, row] : con.d) {
      require(j >= 1 && j <= degree, who + ".d", "degree out of range");
      require(ntheta() > 0, who + ".d", "theta terms need a theta_box");
      require(row.size() == ntheta() * sigma(n(), j), who + ".d",
              "row length must be n_theta * sigma(n, j)");
    }
    require(con.max_degree() <= degree, who, "term degree exceeds problem degree");
  }
}

double eval_constraint(const PolyConstraint& con, const Vec& x_v,
                       const Vec& theta) {
  double f = 0.0;
  if (con.d0.size() > 0) f += con.d0.dot(theta);
  for (const auto& [j, row] : con.c)
    f += row.dot(eval_power(x_v, power_basis(static_cast<int>(x_v.size()), j)));
  for (const auto& [j, row] : con.d) {
    Vec xp = eval_power(x_v, power_basis(static_cast<int>(x_v.size()), j));
    f += row.dot(kron_vec(theta, xp));
  }
  return f;
}

std::string ExtendedSystem::ordering_id() const {
  std::ostringstream os;
  os << "glexd;n=" << n << ";p=" << p;
  return os.str();
}

Vec ExtendedSystem::embed(const Vec& x_v) const {
  Vec out(dim());
  for (int j = 1; j <= p; ++j)
    out.segment(x_offset[j - 1], x_bases[j - 1].size()) =
        eval_power(x_v, x_bases[j - 1]);
  return out;
}

Vec ExtendedSystem::dist_vector(const Vec& x_v, const Vec& w) const {
  Vec out(dist_dim());
  for (size_t b = 0; b < dist_layout.size(); ++b) {
    auto [i, q] = dist_layout[b];
    Vec xp = eval_power(x_v, power_basis(n, i));
    Vec wq = eval_power(w, w_bases[q]);
    out.segment(dist_offset[b], xp.size() * wq.size()) = kron_vec(xp, wq);
  }
  return out;
}

Mat build_phi11(const Mat& A, const Mat& B, double beta) {
  const int nx = static_cast<int>(A.rows());
  const int nv = static_cast<int>(B.cols());
  Mat phi = Mat::Zero(nx + nv, nx + nv);
  phi.topLeftCorner(nx, nx) = A;
  phi.topRightCorner(nx, nv) = B;
  phi.bottomRightCorner(nv, nv) = beta * Mat::Identity(nv, nv);
  return phi;
}

Mat build_phi10(const Mat& Bw, int nv) {
  Mat phi = Mat::Zero(Bw.rows() + nv, Bw.cols());
  phi.topRows(Bw.rows()) = Bw;
  return phi;
}

std::map<std::pair<int, int>, Mat> build_blocks(const Mat& phi11,
                                                const Mat& phi10, int p) {
  const int n = static_cast<int>(phi11.rows());
  const int m = static_cast<int>(phi10.cols());
  if (phi11.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "phi11 must be square");
  if (m > 0 && phi10.rows() != n)
    throw Error(ErrorCode::InvalidArgument, "phi10 row count must match phi11");
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "build_blocks needs p >= 1");

  std::map<std::pair<int, int>, Mat> blocks;
  blocks[{1, 1}] = phi11;
  if (m > 0) blocks[{1, 0}] = phi10;

  for (int j = 2; j <= p; ++j) {
    Mat Cj = Mat(stack_compression(n, j));
    for (int i = (m > 0 ? 0 : j); i <= j; ++i) {
      const int sw = m > 0 ? static_cast<int>(sigma(m, j - i)) : (i == j ? 1 : 0);
      if (sw == 0) continue;
      const int cols = static_cast<int>(sigma(n, i)) * sw;
      Mat block = Mat::Zero(static_cast<int>(sigma(n, j)), cols);
      if (i >= 1 && blocks.count({j - 1, i - 1})) {
        // x(k+1) (x) [x^{i-1} w^{j-i} part]; the leading x factor merges into
        // the state power through the stack expansion.
        Mat Li = Mat(stack_expansion(n, i));
        block += Cj * kron(phi11, blocks[{j - 1, i - 1}]) *
                 kron(Li, Mat::Identity(sw, sw));
      }
      if (i <= j - 1 && m > 0 && blocks.count({j - 1, i})) {
        // w-driven branch: the leading w factor commutes past x^i and merges
        // into the disturbance power.
        Mat gamma = Mat(commute_merge_matrix(i, j, n, m));
        block += Cj * kron(phi10, blocks[{j - 1, i}]) * gamma;
      }
      blocks[{j, i}] = block;
    }
  }
  return blocks;
}

ExtendedSystem assemble_extended(const Mat& phi11, const Mat& phi10, int p) {
  ExtendedSystem ext;
  ext.n = static_cast<int>(phi11.rows());
  ext.nw = static_cast<int>(phi10.cols());
  ext.p = p;
  ext.phi11 = phi11;
  ext.phi10 = phi10;
  ext.blocks = build_blocks(phi11, phi10, p);

  int dim = 0;
  for (int j = 1; j <= p; ++j) {
    ext.x_bases.push_back(power_basis(ext.n, j));
    ext.x_offset.push_back(dim);
    dim += ext.x_bases.back().size();
  }
  ext.Phi = Mat::Zero(dim, dim);
  for (int j = 1; j <= p; ++j)
    ext.Phi.block(ext.x_offset[j - 1], ext.x_offset[j - 1],
                  ext.x_bases[j - 1].size(), ext.x_bases[j - 1].size()) =
        ext.blocks[{j, j}];

  int ddim = 0;
  if (ext.nw > 0) {
    for (int q = 0; q <= p; ++q) ext.w_bases.push_back(power_basis(ext.nw, q));
    for (int j = 1; j <= p; ++j)
      for (int i = 0; i < j; ++i) {
        ext.dist_layout.emplace_back(i, j - i);
        ext.dist_offset.push_back(ddim);
        ddim += static_cast<int>(sigma(ext.n, i) * sigma(ext.nw, j - i));
      }
  }
  ext.Phi_w = Mat::Zero(dim, ddim);
  for (size_t b = 0; b < ext.dist_layout.size(); ++b) {
    auto [i, q] = ext.dist_layout[b];
    const int j = i + q;
    const Mat& block = ext.blocks[{j, i}];
    ext.Phi_w.block(ext.x_offset[j - 1], ext.dist_offset[b], block.rows(),
                    block.cols()) = block;
  }
  return ext;
}

ExtendedSystem assemble_extended(const ProblemSpec& problem) {
  return assemble_extended(build_phi11(problem.A, problem.B, problem.beta),
                           build_phi10(problem.Bw, problem.nv()),
                           problem.degree);
}

LiftedConstraints lift_constraints(const ProblemSpec& problem,
                                   const ExtendedSystem& ext) {
  const int nc = static_cast<int>(problem.constraints.size());
  const int nt = problem.ntheta();
  const int dim = ext.dim();
  LiftedConstraints lc;
  lc.D0 = Mat::Zero(nc, nt);
  lc.C0 = Mat::Zero(nc, dim);
  lc.C1 = Mat::Zero(nc, nt * dim);
  lc.H = Vec(nc);
  for (int i = 0; i < nc; ++i) {
    const auto& con = problem.constraints[i];
    lc.names.push_back(con.name);
    lc.H(i) = con.h;
    if (con.d0.size() > 0) lc.D0.row(i) = con.d0.transpose();
    for (const auto& [j, row] : con.c)
      lc.C0.row(i).segment(ext.x_offset[j - 1], row.size()) = row.transpose();
    for (const auto& [j, row] : con.d) {
      const int sz = ext.x_bases[j - 1].size();
      for (int t = 0; t < nt; ++t)
        lc.C1.row(i).segment(t * dim + ext.x_offset[j - 1], sz) =
            row.segment(t * sz, sz).transpose();
    }
  }
  return lc;
}

Vec eval_lifted(const LiftedConstraints& lc, const Vec& X, const Vec& theta) {
  Vec f = lc.C0 * X;
  if (theta.size() > 0) {
    f += lc.D0 * theta;
    f += lc.C1 * kron_vec(theta, X);
  }
  return f;
}

Vec theta_vertex(const Box& theta_box, int vid) {
  Vec t(theta_box.size());
  for (int b = 0; b < theta_box.size(); ++b)
    t(b) = (vid >> b) & 1 ? theta_box.upper(b) : theta_box.lower(b);
  return t;
}

std::vector<LinearRow> instantiate_vertices(const LiftedConstraints& lc,
                                            const Box& theta_box) {
  const int nt = theta_box.size();
  const int nc = static_cast<int>(lc.H.size());
  const int dim = static_cast<int>(lc.C0.cols());
  if (nt > 24)
    throw Error(ErrorCode::Overflow, "2^n_theta vertex instantiation too large");
  std::vector<LinearRow> rows;
  rows.reserve((1 << nt) * nc);
  for (int vid = 0; vid < (1 << nt); ++vid) {
    Vec t = theta_vertex(theta_box, vid);
    for (int i = 0; i < nc; ++i) {
      LinearRow r;
      r.coeff = lc.C0.row(i).transpose();
      for (int b = 0; b < nt; ++b)
        r.coeff += t(b) * lc.C1.row(i).segment(b * dim, dim).transpose();
      r.rhs = lc.H(i) - (nt > 0 ? lc.D0.row(i).dot(t) : 0.0);
      r.constraint = i;
      r.vertex = vid;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<LinearRow> linear_rows(const ProblemSpec& problem) {
  std::vector<LinearRow> rows;
  for (size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& con = problem.constraints[i];
    if (!con.is_linear_certain()) continue;
    LinearRow r;
    r.coeff = con.c.at(1);
    r.rhs = con.h;
    r.constraint = static_cast<int>(i);
    rows.push_back(std::move(r));
  }
  return rows;
}

Vec shift_equilibrium(const Mat& A, const Mat& B, const Vec& r) {
  Mat M = Mat::Identity(A.rows(), A.cols()) - A;
  return M.partialPivLu().solve(B * r);
}

}  // namespace rgov
