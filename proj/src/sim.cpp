#include "rgov/sim.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace rgov {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& s) {
  return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

bool theta_dependent(const PolyConstraint& con) {
  if (con.d0.size() > 0 && con.d0.lpNorm<Eigen::Infinity>() > 0.0) return true;
  for (const auto& [deg, row] : con.d)
    if (row.size() > 0 && row.lpNorm<Eigen::Infinity>() > 0.0) return true;
  return false;
}

}  // namespace

std::pair<Mat, Mat> c2d(const ContinuousPlant& plant) {
  const int n = static_cast<int>(plant.F.rows());
  const int m = static_cast<int>(plant.G.cols());
  if (plant.F.cols() != n || plant.G.rows() != n)
    throw Error(ErrorCode::InvalidArgument, "c2d: dimension mismatch");
  if (!(plant.Ts > 0.0))
    throw Error(ErrorCode::InvalidArgument, "c2d: sampling period must be > 0");
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = plant.F * plant.Ts;
  aug.topRightCorner(n, m) = plant.G * plant.Ts;
  Mat e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

Vec AircraftPreset::x0() const {
  Vec x(2);
  x << alpha0_deg * kDegToRad, 0.0;
  return x;
}

ContinuousPlant aircraft_closed_loop(const AircraftPreset& preset) {
  // PD law u = -kp (alpha - v) - kd alpha_dot plus exact cancellation of the
  // nominal lift turns the pitch dynamics into a linear loop with unit DC
  // gain from v to alpha: v is the commanded angle of attack.
  ContinuousPlant plant;
  const double a = preset.d2 * preset.kp / preset.J;
  const double b = preset.d2 * preset.kd / preset.J;
  plant.F.resize(2, 2);
  plant.F << 0.0, 1.0, -a, -b;
  plant.G.resize(2, 1);
  plant.G << 0.0, a;
  plant.Ts = preset.Ts;
  return plant;
}

double aircraft_force(const AircraftPreset& preset, const Vec& x_v,
                      const Vec& theta) {
  if (x_v.size() != 3 || theta.size() != 3)
    throw Error(ErrorCode::InvalidArgument, "aircraft_force: dimension mismatch");
  const double alpha = x_v(0), alpha_dot = x_v(1), v = x_v(2);
  const double lift = theta(0) + theta(1) * alpha - theta(2) * alpha * alpha * alpha;
  return -preset.kp * (alpha - v) - preset.kd * alpha_dot +
         (preset.d1 / preset.d2) * lift;
}

ProblemSpec build_aircraft_problem(const AircraftPreset& preset,
                                   bool with_disturbance) {
  ProblemSpec spec;
  auto [A, B] = c2d(aircraft_closed_loop(preset));
  spec.A = A;
  spec.B = B;
  spec.Bw = Mat::Zero(2, 1);
  if (with_disturbance) spec.Bw(0, 0) = 1.0;
  spec.beta = preset.beta;
  spec.degree = 3;

  spec.theta_box.lower = Vec(3);
  spec.theta_box.upper = Vec(3);
  Vec nominal(3);
  nominal << preset.l0, preset.l1, preset.l3;
  spec.theta_box.lower = preset.theta_lo * nominal;
  spec.theta_box.upper = preset.theta_hi * nominal;

  spec.w_box.lower = Vec::Zero(1);
  spec.w_box.upper = Vec::Zero(1);
  if (with_disturbance) {
    spec.w_box.lower(0) = -preset.w_bound;
    spec.w_box.upper(0) = preset.w_bound;
  }

  // Bases over x_v = (alpha, alpha_dot, v).
  const PowerBasis b1 = power_basis(3, 1);
  const PowerBasis b3 = power_basis(3, 3);
  const int alpha1 = b1.index_of({1, 0, 0});
  const int alpha3 = b3.index_of({3, 0, 0});
  const double arm = preset.d1 / preset.d2;

  PolyConstraint stall_hi;
  stall_hi.name = "stall-upper";
  stall_hi.h = preset.alpha_max_deg * kDegToRad;
  stall_hi.c[1] = Vec::Zero(b1.size());
  stall_hi.c[1](alpha1) = 1.0;

  PolyConstraint stall_lo;
  stall_lo.name = "stall-lower";
  stall_lo.h = -preset.alpha_min_deg * kDegToRad;
  stall_lo.c[1] = Vec::Zero(b1.size());
  stall_lo.c[1](alpha1) = -1.0;

  // Elevator force u = -kp(alpha - v) - kd alpha_dot
  //                    + arm (theta_1 + theta_2 alpha - theta_3 alpha^3).
  // The reference sign matches the closed loop above (unit DC gain v -> alpha);
  // the opposite sign would bound a force the loop never applies and exclude
  // every start admissible in practice.
  PolyConstraint force_hi;
  force_hi.name = "force-upper";
  force_hi.h = preset.u_max;
  force_hi.d0 = Vec::Zero(3);
  force_hi.d0(0) = arm;
  force_hi.c[1] = Vec::Zero(b1.size());
  force_hi.c[1](0) = -preset.kp;
  force_hi.c[1](1) = -preset.kd;
  force_hi.c[1](2) = preset.kp;
  force_hi.d[1] = Vec::Zero(3 * b1.size());
  force_hi.d[1](1 * b1.size() + alpha1) = arm;
  force_hi.d[3] = Vec::Zero(3 * b3.size());
  force_hi.d[3](2 * b3.size() + alpha3) = -arm;

  PolyConstraint force_lo = force_hi;
  force_lo.name = "force-lower";
  force_lo.d0 = -force_hi.d0;
  force_lo.c[1] = -force_hi.c[1];
  force_lo.d[1] = -force_hi.d[1];
  force_lo.d[3] = -force_hi.d[3];

  spec.constraints = {stall_hi, stall_lo, force_hi, force_lo};
  spec.validate();
  return spec;
}

DisturbanceKind parse_disturbance_kind(const std::string& name) {
  if (name == "zero") return DisturbanceKind::Zero;
  if (name == "uniform-random") return DisturbanceKind::UniformRandom;
  if (name == "worst-corner") return DisturbanceKind::WorstCorner;
  throw Error(ErrorCode::InvalidArgument,
              "unknown disturbance kind '" + name + "'");
}

std::string disturbance_kind_name(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::Zero: return "zero";
    case DisturbanceKind::UniformRandom: return "uniform-random";
    default: return "worst-corner";
  }
}

DisturbanceSource::DisturbanceSource(DisturbanceKind kind, Box w_box,
                                     std::uint64_t seed)
    : kind_(kind), box_(std::move(w_box)), seed_(seed), state_(seed) {
  for (int i = 0; i < box_.size(); ++i)
    if (!(box_.lower(i) <= box_.upper(i)) ||
        !std::isfinite(box_.lower(i)) || !std::isfinite(box_.upper(i)))
      throw Error(ErrorCode::InvalidArgument, "disturbance box must be finite");
}

void DisturbanceSource::reset() {
  state_ = seed_;
  step_ = 0;
}

Vec DisturbanceSource::next() {
  Vec w(box_.size());
  switch (kind_) {
    case DisturbanceKind::Zero:
      w.setZero();
      break;
    case DisturbanceKind::UniformRandom:
      for (int i = 0; i < w.size(); ++i)
        w(i) = box_.lower(i) +
               uniform01(state_) * (box_.upper(i) - box_.lower(i));
      break;
    case DisturbanceKind::WorstCorner:
      w = step_ % 2 == 0 ? box_.upper : box_.lower;
      break;
  }
  ++step_;
  return w;
}

Trajectory simulate(const ProblemSpec& spec, GovernorState* governor,
                    const Vec& x0, int N, DisturbanceSource& w_source) {
  if (x0.size() != spec.nx() || !x0.allFinite())
    throw Error(ErrorCode::InvalidArgument, "simulate: bad initial state");
  if (N < 0)
    throw Error(ErrorCode::InvalidArgument, "simulate: negative horizon");
  if (governor != nullptr && governor->v.size() != spec.nv())
    throw Error(ErrorCode::InvalidArgument,
                "simulate: governor not initialized for this problem");

  Trajectory traj;
  traj.steps.reserve(N);
  Vec x = x0;
  for (int k = 0; k < N; ++k) {
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "state became non-finite at step " << k;
      throw Error(ErrorCode::NumericalFailure, os.str());
    }
    Vec v;
    bool inside = false;
    bool exhausted = false;
    if (governor != nullptr) {
      v = k == 0 ? governor->v : update(*governor, x);
      inside = admissible(*governor, x, v);
      exhausted = governor->margin_exhausted;
    } else {
      v = Vec::Zero(spec.nv());
    }
    Vec w = w_source.next();
    if (w.size() != spec.nw())
      throw Error(ErrorCode::InvalidArgument,
                  "simulate: disturbance dimension mismatch");

    traj.steps.push_back(k);
    traj.states.push_back(x);
    traj.refs.push_back(v);
    traj.disturbances.push_back(w);
    traj.in_moas.push_back(inside ? 1 : 0);
    traj.margin_flags.push_back(exhausted ? 1 : 0);

    x = spec.A * x + spec.B * v + spec.Bw * w;
  }
  return traj;
}

SweepResult theta_sweep(const ProblemSpec& spec, const Trajectory& traj,
                        std::vector<Vec> theta_samples, int constraint_index) {
  SweepResult out;
  if (constraint_index < 0) {
    for (size_t i = 0; i < spec.constraints.size(); ++i)
      if (theta_dependent(spec.constraints[i])) {
        constraint_index = static_cast<int>(i);
        break;
      }
    if (constraint_index < 0) constraint_index = 0;
  }
  if (constraint_index >= static_cast<int>(spec.constraints.size()))
    throw Error(ErrorCode::InvalidArgument, "theta_sweep: no such constraint");
  const PolyConstraint& con = spec.constraints[constraint_index];
  out.constraint_index = constraint_index;
  out.constraint_name = con.name;

  if (theta_samples.empty()) {
    const int nt = spec.ntheta();
    if (nt > 20)
      throw Error(ErrorCode::InvalidArgument, "theta_sweep: too many vertices");
    for (int vid = 0; vid < (1 << nt); ++vid)
      theta_samples.push_back(theta_vertex(spec.theta_box, vid));
    theta_samples.push_back(
        0.5 * (spec.theta_box.lower + spec.theta_box.upper));
  }

  for (const Vec& theta : theta_samples) {
    if (theta.size() != spec.ntheta())
      throw Error(ErrorCode::InvalidArgument, "theta_sweep: bad sample size");
    SweepSeries series;
    series.theta = theta;
    series.values.reserve(traj.size());
    Vec x_v(spec.n());
    for (int k = 0; k < traj.size(); ++k) {
      x_v.head(spec.nx()) = traj.states[k];
      x_v.tail(spec.nv()) = traj.refs[k];
      double f = eval_constraint(con, x_v, theta);
      series.values.push_back(f);
      series.max_abs = std::max(series.max_abs, std::abs(f));
    }
    out.series.push_back(std::move(series));
  }
  return out;
}

}  // namespace rgov
