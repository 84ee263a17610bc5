#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rgov/governor.hpp"
#include "rgov/lift.hpp"
#include "rgov/types.hpp"

namespace rgov {

// Continuous-time pair dx/dt = F x + G u sampled with period Ts.
struct ContinuousPlant {
  Mat F;
  Mat G;
  double Ts = 0.0;
};

// Zero-order-hold discretization A = e^{F Ts}, B = int_0^Ts e^{F s} ds G via
// the augmented matrix exponential (scaling-and-squaring).
std::pair<Mat, Mat> c2d(const ContinuousPlant& plant);

// Longitudinal pitch example: a tail-commanded airframe pre-stabilized by a
// PD law on the angle of attack, with a cubic lift polynomial whose three
// coefficients are only known to within +/-20%, a stall corridor on alpha,
// and a hard bound on the elevator force.
struct AircraftPreset {
  double d1 = 8.0;      // m, lift arm
  double d2 = 40.0;     // m, tail arm
  double J = 4.5e6;     // N m^2, pitch inertia
  double l0 = 2.5e5;    // N, lift polynomial constant
  double l1 = 8.6e6;    // N/rad, lift polynomial slope
  double l3 = 4.35e7;   // N/rad^3, lift polynomial cubic coefficient
  double kp = 5.2e7;    // PD proportional gain
  double kd = 7.6e6;    // PD derivative gain
  double Ts = 0.01;     // s, sampling period
  double alpha_min_deg = -0.2;   // stall corridor in degrees
  double alpha_max_deg = 14.7;
  double u_max = 4.0e5;          // N, elevator force bound
  double theta_lo = 0.8;         // multiplicative uncertainty on (l0, l1, l3)
  double theta_hi = 1.2;
  double w_bound = 0.05;         // rad, additive alpha disturbance when enabled
  double beta = 0.95;            // reference decay factor
  int horizon = 600;             // default closed-loop steps
  double alpha0_deg = 14.0;      // default initial angle of attack

  Vec x0() const;                // [alpha0 in rad, 0]
};

// Pre-stabilized continuous closed loop of the preset (state [alpha, alpha_dot],
// input v).
ContinuousPlant aircraft_closed_loop(const AircraftPreset& preset);

// Full problem description: discretized dynamics, stall rows, the two cubic
// elevator-force rows with theta = (l0, l1, l3), the theta box and (when
// enabled) the disturbance channel B_w = [1, 0]'.
ProblemSpec build_aircraft_problem(const AircraftPreset& preset,
                                   bool with_disturbance);

// Elevator force u(x_v, theta) of the preset control law (reference route
// used by sweeps and tests).
double aircraft_force(const AircraftPreset& preset, const Vec& x_v,
                      const Vec& theta);

enum class DisturbanceKind { Zero, UniformRandom, WorstCorner };

DisturbanceKind parse_disturbance_kind(const std::string& name);
std::string disturbance_kind_name(DisturbanceKind kind);

// Deterministic per-seed disturbance stream over a box.  UniformRandom draws
// each coordinate from splitmix64 (recorded in output metadata);
// WorstCorner alternates between the two opposite extreme corners.
class DisturbanceSource {
 public:
  DisturbanceSource(DisturbanceKind kind, Box w_box, std::uint64_t seed);

  Vec next();
  void reset();

  DisturbanceKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  static const char* generator_name() { return "splitmix64"; }

 private:
  DisturbanceKind kind_;
  Box box_;
  std::uint64_t seed_;
  std::uint64_t state_;
  long long step_ = 0;
};

// Closed-loop record, one entry per simulated step k = 0..N-1.
struct Trajectory {
  std::vector<int> steps;
  std::vector<Vec> states;        // x(k)
  std::vector<Vec> refs;          // v(k)
  std::vector<Vec> disturbances;  // w(k)
  std::vector<char> in_moas;      // embed(x(k), v(k)) membership audit
  std::vector<char> margin_flags; // governor margin_exhausted latch at k

  int size() const { return static_cast<int>(steps.size()); }
};

// Propagates x(k+1) = A x(k) + B v(k) + B_w w(k) for N steps.  With a
// governor, v(0) is its initialized reference and later steps call update;
// without one the loop runs at v = 0.  Throws on non-finite states (with the
// step index) and propagates governor errors.
Trajectory simulate(const ProblemSpec& spec, GovernorState* governor,
                    const Vec& x0, int N, DisturbanceSource& w_source);

// Constraint-output family along a trajectory for a set of theta samples.
struct SweepSeries {
  Vec theta;
  std::vector<double> values;  // f(x_v(k), theta) per step
  double max_abs = 0.0;
};

struct SweepResult {
  int constraint_index = -1;
  std::string constraint_name;
  std::vector<SweepSeries> series;
};

// Default samples: every theta-box vertex plus the midpoint; default
// constraint: the first theta-dependent row (the force bound in the preset).
SweepResult theta_sweep(const ProblemSpec& spec, const Trajectory& traj,
                        std::vector<Vec> theta_samples = {},
                        int constraint_index = -1);

}  // namespace rgov
