#include "rgov/polykron.hpp"

#include <limits>
#include <numeric>

namespace rgov {
namespace {

void check_np(int n, int p) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "power basis needs n >= 1");
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "power basis needs p >= 0");
}

// n^p with overflow guard; structural matrices address Kronecker slots by
// integer index, so the count must stay comfortably inside int range.
std::int64_t checked_pow(int n, int p) {
  std::int64_t r = 1;
  for (int k = 0; k < p; ++k) {
    if (r > std::numeric_limits<int>::max() / n)
      throw Error(ErrorCode::Overflow, "n^p exceeds addressable slot range");
    r *= n;
  }
  return r;
}

void enumerate(int vars_left, int deg_left, std::vector<int>& prefix,
               std::vector<Monomial>& out) {
  if (vars_left == 1) {
    prefix.push_back(deg_left);
    out.push_back(Monomial{prefix});
    prefix.pop_back();
    return;
  }
  for (int e = deg_left; e >= 0; --e) {
    prefix.push_back(e);
    enumerate(vars_left - 1, deg_left - e, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

int Monomial::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

int PowerBasis::index_of(const std::vector<int>& exponents) const {
  auto it = position.find(exponents);
  if (it == position.end())
    throw Error(ErrorCode::InvalidArgument, "exponent tuple not in basis");
  return it->second;
}

std::int64_t sigma(int n, int p) {
  check_np(n, p);
  // C(n+p-1, p) built multiplicatively; each partial result is itself a
  // binomial coefficient, so the first overflowing step is the true one.
  std::int64_t r = 1;
  for (int k = 1; k <= p; ++k) {
    __int128 t = static_cast<__int128>(r) * (n - 1 + k);
    t /= k;
    if (t > std::numeric_limits<std::int64_t>::max())
      throw Error(ErrorCode::Overflow, "sigma(n,p) exceeds int64 range");
    r = static_cast<std::int64_t>(t);
  }
  return r;
}

PowerBasis power_basis(int n, int p) {
  check_np(n, p);
  PowerBasis b;
  b.n = n;
  b.p = p;
  std::vector<int> prefix;
  enumerate(n, p, prefix, b.monomials);
  for (int i = 0; i < b.size(); ++i) b.position[b.monomials[i].exponents] = i;
  return b;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vec kron_vec(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Vec kron_power(const Vec& x, int p) {
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "kron_power needs p >= 0");
  Vec out = Vec::Ones(1);
  for (int k = 0; k < p; ++k) out = kron_vec(x, out);
  return out;
}

Vec eval_power(const Vec& x, const PowerBasis& basis) {
  if (x.size() != basis.n)
    throw Error(ErrorCode::InvalidArgument, "eval_power dimension mismatch");
  Vec out(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    double v = 1.0;
    const auto& e = basis.monomials[i].exponents;
    for (int k = 0; k < basis.n; ++k)
      for (int r = 0; r < e[k]; ++r) v *= x(k);
    out(i) = v;
  }
  return out;
}

SpMat compression_matrix(const PowerBasis& basis) {
  std::int64_t cols = checked_pow(basis.n, basis.p);
  SpMat m(basis.size(), static_cast<int>(cols));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    // First occurrence of the monomial: ascending digit string, e.g. the
    // exponents (1,2) in n = 3 give digits (0,1,1) and slot 0*9 + 1*3 + 1.
    const auto& e = basis.monomials[i].exponents;
    std::int64_t slot = 0;
    for (int var = 0; var < basis.n; ++var)
      for (int r = 0; r < e[var]; ++r) slot = slot * basis.n + var;
    trip.emplace_back(i, static_cast<int>(slot), 1.0);
  }
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat expansion_matrix(const PowerBasis& basis) {
  std::int64_t rows = checked_pow(basis.n, basis.p);
  if (rows > (1 << 24))
    throw Error(ErrorCode::Overflow, "expansion matrix would exceed 2^24 rows");
  SpMat m(static_cast<int>(rows), basis.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(rows);
  std::vector<int> exps(basis.n);
  for (std::int64_t slot = 0; slot < rows; ++slot) {
    std::fill(exps.begin(), exps.end(), 0);
    std::int64_t s = slot;
    for (int k = 0; k < basis.p; ++k) {
      exps[s % basis.n] += 1;
      s /= basis.n;
    }
    trip.emplace_back(static_cast<int>(slot), basis.index_of(exps), 1.0);
  }
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat stack_expansion(int n, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "stack_expansion needs p >= 1");
  PowerBasis prev = power_basis(n, p - 1);
  PowerBasis next = power_basis(n, p);
  SpMat m(n * prev.size(), next.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.rows());
  for (int var = 0; var < n; ++var)
    for (int i = 0; i < prev.size(); ++i) {
      std::vector<int> e = prev.monomials[i].exponents;
      e[var] += 1;
      trip.emplace_back(var * prev.size() + i, next.index_of(e), 1.0);
    }
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat stack_compression(int n, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "stack_compression needs p >= 1");
  PowerBasis prev = power_basis(n, p - 1);
  PowerBasis next = power_basis(n, p);
  SpMat m(next.size(), n * prev.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(next.size());
  for (int i = 0; i < next.size(); ++i) {
    // Lowest leading variable present in the monomial selects the slot.
    std::vector<int> e = next.monomials[i].exponents;
    int var = 0;
    while (e[var] == 0) ++var;
    e[var] -= 1;
    trip.emplace_back(i, var * prev.size() + prev.index_of(e), 1.0);
  }
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

MixedBasis mixed_basis(int n_a, int p, int n_b, int q) {
  return MixedBasis{power_basis(n_a, p), power_basis(n_b, q)};
}

SpMat commute_merge_matrix(int i, int j, int n_x, int n_w) {
  if (i < 0 || j < 1 || i > j - 1)
    throw Error(ErrorCode::InvalidArgument, "commute_merge_matrix needs 0 <= i <= j-1");
  if (n_w < 1)
    throw Error(ErrorCode::InvalidArgument, "commute_merge_matrix needs n_w >= 1");
  PowerBasis xb = power_basis(n_x, i);
  PowerBasis wprev = power_basis(n_w, j - 1 - i);
  PowerBasis wnext = power_basis(n_w, j - i);
  SpMat m(n_w * xb.size() * wprev.size(), xb.size() * wnext.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.rows());
  for (int a = 0; a < n_w; ++a)
    for (int mx = 0; mx < xb.size(); ++mx)
      for (int mw = 0; mw < wprev.size(); ++mw) {
        std::vector<int> e = wprev.monomials[mw].exponents;
        e[a] += 1;  // the leading w factor merges into the w monomial
        int row = (a * xb.size() + mx) * wprev.size() + mw;
        int col = mx * wnext.size() + wnext.index_of(e);
        trip.emplace_back(row, col, 1.0);
      }
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace rgov
