// Command-line front end: builds and caches admissible-set polytopes, runs
// governed/ungoverned closed-loop simulations, sweeps the uncertain
// parameters, grids feasible initial references, and calibrates the
// reference decay factor.  All artifacts are plain text (CSV + JSON
// sidecars) so plotting stays in external tools.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rgov/governor.hpp"
#include "rgov/lift.hpp"
#include "rgov/moas.hpp"
#include "rgov/pipeline.hpp"
#include "rgov/polykron.hpp"
#include "rgov/problem_io.hpp"
#include "rgov/sim.hpp"
#include "rgov/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rgov;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr double kAuditTol = 1e-7;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::TightenedInfeasible:
    case ErrorCode::NotFinitelyDetermined:
    case ErrorCode::UnboundedCoordinate:
    case ErrorCode::InadmissibleInitialState:
      return 3;
    default:
      return 4;
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex16(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::InvalidArgument,
                "cannot open for writing: " + path.string());
  out << text;
  if (!out)
    throw Error(ErrorCode::NumericalFailure, "write failed: " + path.string());
}

json box_to_json(const Box& box) {
  json j;
  j["lower"] = std::vector<double>(box.lower.data(),
                                   box.lower.data() + box.lower.size());
  j["upper"] = std::vector<double>(box.upper.data(),
                                   box.upper.data() + box.upper.size());
  return j;
}

Box box_from_json(const json& j) {
  Box box;
  auto lo = j.at("lower").get<std::vector<double>>();
  auto hi = j.at("upper").get<std::vector<double>>();
  box.lower = Eigen::Map<const Vec>(lo.data(), lo.size());
  box.upper = Eigen::Map<const Vec>(hi.data(), hi.size());
  return box;
}

// ---------------------------------------------------------------------------
// Options shared by the subcommands
// ---------------------------------------------------------------------------

struct Options {
  std::string preset;       // "aircraft" | "aircraft-disturbed"
  std::string problem;      // path to a problem JSON file
  std::string out = "out";  // artifact directory
  std::string disturbance;  // "", "zero", "uniform-random", "worst-corner"
  std::string x0_text;      // comma-separated initial state override
  double beta = std::numeric_limits<double>::quiet_NaN();
  double eps = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  int steps = -1;  // -1: preset horizon (600) or 100 for file problems
  int depth = 30;
  int cap = 10000;
  int grid_points = 11;
  bool no_governor = false;
  bool no_cache = false;
  bool vertices_only = false;  // sweep: theta-box vertices, no midpoint
  std::string theta_text;      // sweep: one explicit theta sample
};

std::vector<double> parse_csv_numbers(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument,
                  flag + ": cannot parse '" + tok + "' as a number");
    }
  }
  return vals;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--preset", o.preset,
                  "built-in problem: aircraft or aircraft-disturbed")
      ->envname("RGOV_PRESET");
  cmd->add_option("--problem", o.problem, "problem description JSON file")
      ->envname("RGOV_PROBLEM");
  cmd->add_option("--out", o.out, "output directory (created if missing)")
      ->envname("RGOV_OUT");
  cmd->add_option("--beta", o.beta, "reference decay factor override in (0,1)")
      ->envname("RGOV_BETA");
  cmd->add_option("--eps", o.eps,
                  "admissible-set tightening margin (default: auto)")
      ->envname("RGOV_EPS");
  cmd->add_option("--seed", o.seed, "disturbance stream seed")
      ->envname("RGOV_SEED");
  cmd->add_option("--steps", o.steps, "simulation horizon")
      ->envname("RGOV_STEPS");
  cmd->add_option("--depth", o.depth, "governor bisection depth")
      ->envname("RGOV_DEPTH");
  cmd->add_option("--cap", o.cap, "admissible-set iteration cap")
      ->envname("RGOV_CAP");
  cmd->add_option("--disturbance", o.disturbance,
                  "zero | uniform-random | worst-corner")
      ->envname("RGOV_DISTURBANCE");
  cmd->add_option("--x0", o.x0_text, "initial state, comma separated")
      ->envname("RGOV_X0");
  cmd->add_flag("--no-governor", o.no_governor, "simulate with v = 0");
  cmd->add_flag("--no-cache", o.no_cache, "rebuild even when cached");
  cmd->add_option("--grid-points", o.grid_points,
                  "grid resolution per state dimension (grid-init)")
      ->envname("RGOV_GRID_POINTS");
}

// ---------------------------------------------------------------------------
// Problem resolution
// ---------------------------------------------------------------------------

struct ResolvedProblem {
  ProblemSpec spec;
  std::string source;       // "preset aircraft" or "file <path>"
  bool is_preset = false;
  AircraftPreset preset;    // valid when is_preset
};

ResolvedProblem resolve_problem(const Options& o) {
  if (!o.preset.empty() && !o.problem.empty())
    throw Error(ErrorCode::InvalidArgument,
                "--preset and --problem are mutually exclusive");
  if (o.preset.empty() && o.problem.empty())
    throw Error(ErrorCode::InvalidArgument,
                "one of --preset or --problem is required");
  ResolvedProblem r;
  if (!o.preset.empty()) {
    r.is_preset = true;
    if (!std::isnan(o.beta)) r.preset.beta = o.beta;
    if (o.preset == "aircraft") {
      r.spec = build_aircraft_problem(r.preset, false);
    } else if (o.preset == "aircraft-disturbed") {
      r.spec = build_aircraft_problem(r.preset, true);
    } else {
      throw Error(ErrorCode::InvalidArgument,
                  "unknown preset '" + o.preset +
                      "' (expected aircraft or aircraft-disturbed)");
    }
    r.source = "preset " + o.preset;
  } else {
    r.spec = load_problem(o.problem);
    if (!std::isnan(o.beta)) r.spec.beta = o.beta;
    r.spec.validate();
    r.source = "file " + o.problem;
  }
  return r;
}

Vec resolve_x0(const Options& o, const ResolvedProblem& r) {
  if (!o.x0_text.empty()) {
    std::vector<double> vals = parse_csv_numbers(o.x0_text, "--x0");
    if (static_cast<int>(vals.size()) != r.spec.nx())
      throw Error(ErrorCode::InvalidArgument,
                  "--x0 needs " + std::to_string(r.spec.nx()) + " entries");
    return Eigen::Map<const Vec>(vals.data(), vals.size());
  }
  if (r.is_preset) return r.preset.x0();
  return Vec::Zero(r.spec.nx());
}

DisturbanceKind resolve_kind(const Options& o, const ProblemSpec& spec) {
  if (!o.disturbance.empty()) return parse_disturbance_kind(o.disturbance);
  return spec.w_box.is_zero() ? DisturbanceKind::Zero
                              : DisturbanceKind::UniformRandom;
}

int resolve_steps(const Options& o, const ResolvedProblem& r) {
  if (o.steps >= 0) return o.steps;
  return r.is_preset ? r.preset.horizon : 100;
}

// ---------------------------------------------------------------------------
// Admissible-set construction with on-disk caching
// ---------------------------------------------------------------------------

struct MoasBundle {
  Polytope poly;
  Box state_box;
  fs::path poly_path;
  std::string hash;
  bool cached = false;
  bool single_stage = false;
  int theta_vertices = 0;
  int vertex_rows = 0;
  int box_rows = 0;
  int lin_t_star = 0, lin_rows_before = 0, lin_rows_after = 0;
  int rob_t_star = 0, rob_rows_before = 0, rob_rows_after = 0;
  double wall_seconds = 0.0;  // zero on cache hits
};

std::string cache_key(const ProblemSpec& spec, const Options& o) {
  std::string src = problem_to_json(spec);
  src += "|eps=" + (std::isnan(o.eps) ? std::string("auto") : fmt17(o.eps));
  src += "|cap=" + std::to_string(o.cap);
  return hex16(fnv1a(src));
}

json moas_meta(const ProblemSpec& spec, const MoasBundle& b,
               const Options& o) {
  json m;
  m["tool"] = "rgov";
  m["version"] = kToolVersion;
  m["kind"] = "admissible-set";
  m["problem_hash"] = b.hash;
  m["ordering"] = b.poly.ordering;
  m["beta"] = spec.beta;
  if (std::isnan(o.eps))
    m["eps"] = "auto";
  else
    m["eps"] = o.eps;
  m["iteration_cap"] = o.cap;
  m["single_stage"] = b.single_stage;
  m["theta_vertices"] = b.theta_vertices;
  m["vertex_rows"] = b.vertex_rows;
  m["box_rows"] = b.box_rows;
  m["state_box"] = box_to_json(b.state_box);
  m["stage_one"] = {{"t_star", b.lin_t_star},
                    {"rows_before", b.lin_rows_before},
                    {"rows_after", b.lin_rows_after}};
  m["stage_two"] = {{"t_star", b.rob_t_star},
                    {"rows_before", b.rob_rows_before},
                    {"rows_after", b.rob_rows_after}};
  return m;
}

MoasBundle obtain_moas(const ResolvedProblem& r, const Options& o) {
  fs::create_directories(o.out);
  MoasBundle b;
  b.hash = cache_key(r.spec, o);
  b.poly_path = fs::path(o.out) / ("moas-" + b.hash + ".poly");
  fs::path meta_path = fs::path(o.out) / ("moas-" + b.hash + ".meta.json");

  if (!o.no_cache && fs::exists(b.poly_path) && fs::exists(meta_path)) {
    try {
      std::ifstream in(meta_path);
      json m = json::parse(in);
      b.poly = load_polytope(b.poly_path);
      b.state_box = box_from_json(m.at("state_box"));
      b.single_stage = m.at("single_stage").get<bool>();
      b.theta_vertices = m.at("theta_vertices").get<int>();
      b.vertex_rows = m.at("vertex_rows").get<int>();
      b.box_rows = m.at("box_rows").get<int>();
      b.lin_t_star = m.at("stage_one").at("t_star").get<int>();
      b.lin_rows_before = m.at("stage_one").at("rows_before").get<int>();
      b.lin_rows_after = m.at("stage_one").at("rows_after").get<int>();
      b.rob_t_star = m.at("stage_two").at("t_star").get<int>();
      b.rob_rows_before = m.at("stage_two").at("rows_before").get<int>();
      b.rob_rows_after = m.at("stage_two").at("rows_after").get<int>();
      b.cached = true;
      return b;
    } catch (const std::exception&) {
      // fall through to a rebuild on any cache damage
    }
  }

  MoasOptions opt;
  opt.eps = o.eps;
  opt.iteration_cap = o.cap;
  GovernorSetReport report = build_governor_set(r.spec, opt);
  b.poly = report.robust.polytope;
  b.state_box = report.state_box;
  b.single_stage = report.single_stage;
  b.theta_vertices = 1 << r.spec.ntheta();
  b.vertex_rows = report.vertex_rows;
  b.box_rows = report.box_row_count;
  b.lin_t_star = report.linear.t_star;
  b.lin_rows_before = report.linear.rows_before;
  b.lin_rows_after = report.linear.rows_after;
  b.rob_t_star = report.robust.t_star;
  b.rob_rows_before = report.robust.rows_before;
  b.rob_rows_after = report.robust.rows_after;
  b.wall_seconds = report.wall_seconds;

  save_polytope(b.poly_path, b.poly);
  write_text(meta_path, moas_meta(r.spec, b, o).dump(2) + "\n");
  return b;
}

void print_moas_report(const ResolvedProblem& r, const MoasBundle& b) {
  std::cout << "problem source: " << r.source << "\n";
  std::cout << "problem hash: " << b.hash << "\n";
  std::cout << "beta: " << fmt17(r.spec.beta) << "\n";
  std::cout << "theta vertices: " << b.theta_vertices << "\n";
  std::cout << "stage one: t_star=" << b.lin_t_star
            << " rows_before=" << b.lin_rows_before
            << " rows_after=" << b.lin_rows_after << "\n";
  std::cout << "stage two: t_star=" << b.rob_t_star
            << " rows_before=" << b.rob_rows_before
            << " rows_after=" << b.rob_rows_after << "\n";
  std::cout << "vertex rows: " << b.vertex_rows
            << ", box rows: " << b.box_rows << "\n";
  std::cout << "single stage: " << (b.single_stage ? "yes" : "no");
  if (b.single_stage)
    std::cout << " (degree 1, no uncertain parameters: the robust stage "
                 "equals the linear stage exactly)";
  std::cout << "\n";
  std::cout << "cache: " << (b.cached ? "hit" : "miss") << "\n";
  if (!b.cached)
    std::cout << "wall seconds: " << fmt17(b.wall_seconds) << "\n";
  std::cout << "polytope file: " << b.poly_path.string() << " (rows "
            << b.poly.rows() << ", dim " << b.poly.dim() << ")\n";
}

// ---------------------------------------------------------------------------
// Shared metadata
// ---------------------------------------------------------------------------

json run_meta(const std::string& command, const ResolvedProblem& r,
              const Options& o, const MoasBundle* moas,
              DisturbanceKind kind, int steps,
              const std::string& ordering) {
  json m;
  m["tool"] = "rgov";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["problem_source"] = r.source;
  m["ordering"] = ordering;
  m["beta"] = r.spec.beta;
  if (std::isnan(o.eps))
    m["eps"] = "auto";
  else
    m["eps"] = o.eps;
  m["iteration_cap"] = o.cap;
  m["bisection_depth"] = o.depth;
  m["seed"] = o.seed;
  m["steps"] = steps;
  m["governor"] = !o.no_governor;
  m["disturbance"] = {{"kind", disturbance_kind_name(kind)},
                      {"generator", DisturbanceSource::generator_name()}};
  if (moas != nullptr) {
    m["problem_hash"] = moas->hash;
    m["polytope_file"] = moas->poly_path.filename().string();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_build_moas(const Options& o) {
  ResolvedProblem r = resolve_problem(o);
  MoasBundle b = obtain_moas(r, o);
  print_moas_report(r, b);
  return 0;
}

struct SimArtifacts {
  Trajectory traj;
  SweepResult sweep;
  std::vector<char> audit;
  bool moas_available = false;
  std::string moas_note;
  std::string ordering;
  MoasBundle moas;
};

// Shared by run/sweep: obtain the set (optional for ungoverned runs),
// initialize the governor, simulate, audit, and evaluate the theta family.
SimArtifacts run_simulation(const ResolvedProblem& r, const Options& o,
                            int steps) {
  SimArtifacts art;
  const ProblemSpec& spec = r.spec;

  try {
    art.moas = obtain_moas(r, o);
    art.moas_available = true;
  } catch (const Error& e) {
    if (!o.no_governor) throw;  // the governor cannot run without the set
    art.moas_note = std::string("admissible set unavailable (") + e.what() +
                    "); audit column zeroed";
  }

  LiftingMap lift = make_lifting_map(spec.nx(), spec.nv(), spec.degree);
  art.ordering = lift.ordering;
  Vec x0 = resolve_x0(o, r);

  std::optional<GovernorState> governor;
  if (!o.no_governor) {
    governor.emplace(
        make_governor(art.moas.poly, lift, spec.beta, o.depth));
    try {
      initialize(*governor, x0);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InadmissibleInitialState &&
          art.moas_available) {
        // Report which rows exclude the state even at v = 0.
        Vec X0 = lift.embed(x0, Vec::Zero(spec.nv()));
        Vec margin = art.moas.poly.G * X0 - art.moas.poly.g;
        std::cout << "inadmissible initial state; violated rows at v=0:\n";
        int shown = 0;
        for (int i = 0; i < margin.size() && shown < 10; ++i) {
          if (margin(i) <= kAuditTol) continue;
          const RowTag& tag = art.moas.poly.tags[i];
          std::string name =
              tag.constraint >= 0 &&
                      tag.constraint <
                          static_cast<int>(spec.constraints.size())
                  ? spec.constraints[tag.constraint].name
                  : "row " + std::to_string(tag.constraint);
          std::cout << "  " << name << " (t=" << tag.t
                    << ", vertex=" << tag.vertex
                    << "): margin " << fmt17(margin(i)) << "\n";
          ++shown;
        }
      }
      throw;
    }
  }

  DisturbanceKind kind = resolve_kind(o, spec);
  DisturbanceSource w_source(kind, spec.w_box, o.seed);
  art.traj = simulate(spec, governor ? &*governor : nullptr, x0, steps,
                      w_source);

  art.audit.resize(art.traj.size(), 0);
  if (art.moas_available) {
    for (int k = 0; k < art.traj.size(); ++k) {
      Vec X = lift.embed(art.traj.states[k], art.traj.refs[k]);
      art.audit[k] = art.moas.poly.contains(X, kAuditTol) ? 1 : 0;
    }
  }
  if (art.traj.size() > 0) {
    std::vector<Vec> samples;  // empty: vertex family plus midpoint
    if (o.vertices_only)
      for (int vid = 0; vid < (1 << spec.ntheta()); ++vid)
        samples.push_back(theta_vertex(spec.theta_box, vid));
    if (!o.theta_text.empty()) {
      std::vector<double> vals = parse_csv_numbers(o.theta_text, "--theta");
      if (static_cast<int>(vals.size()) != spec.ntheta())
        throw Error(ErrorCode::InvalidArgument,
                    "--theta needs " + std::to_string(spec.ntheta()) +
                        " entries");
      samples = {Eigen::Map<const Vec>(vals.data(), vals.size())};
    }
    art.sweep = theta_sweep(spec, art.traj, std::move(samples));
  }
  return art;
}

void print_run_summary(const ResolvedProblem& r, const SimArtifacts& art,
                       int steps) {
  std::cout << "steps: " << steps << "\n";
  if (!art.moas_note.empty()) std::cout << art.moas_note << "\n";

  int first_bad_audit = -1;
  for (int k = 0; k < art.traj.size(); ++k)
    if (!art.audit[k]) {
      first_bad_audit = k;
      break;
    }
  if (art.moas_available)
    std::cout << "audit: "
              << (first_bad_audit < 0
                      ? "all-pass"
                      : "first-fail step=" + std::to_string(first_bad_audit))
              << "\n";

  bool exhausted = false;
  int exhausted_at = -1;
  for (int k = 0; k < art.traj.size(); ++k)
    if (art.traj.margin_flags[k]) {
      exhausted = true;
      exhausted_at = k;
      break;
    }
  std::cout << "safety margin: "
            << (exhausted ? "exhausted at step " + std::to_string(exhausted_at)
                          : "ok")
            << "\n";

  if (art.sweep.constraint_index >= 0 && !art.sweep.series.empty()) {
    const PolyConstraint& con =
        r.spec.constraints[art.sweep.constraint_index];
    double worst = 0.0;
    int first_violation = -1;
    for (const SweepSeries& s : art.sweep.series) {
      worst = std::max(worst, s.max_abs);
      for (size_t k = 0; k < s.values.size(); ++k)
        if (std::abs(s.values[k]) > con.h * (1.0 + 1e-6)) {
          if (first_violation < 0 || static_cast<int>(k) < first_violation)
            first_violation = static_cast<int>(k);
          break;
        }
    }
    std::cout << "constraint family '" << art.sweep.constraint_name
              << "': max |value| " << fmt17(worst) << " vs bound "
              << fmt17(con.h) << "\n";
    if (first_violation >= 0)
      std::cout << "violation: constraint '" << art.sweep.constraint_name
                << "' exceeded first at step " << first_violation << "\n";
    else
      std::cout << "violation: none\n";
  }
}

int cmd_run(const Options& o) {
  ResolvedProblem r = resolve_problem(o);
  const int steps = resolve_steps(o, r);
  SimArtifacts art = run_simulation(r, o, steps);
  const ProblemSpec& spec = r.spec;

  fs::create_directories(o.out);
  fs::path csv_path = fs::path(o.out) / "trajectory.csv";
  std::ostringstream csv;
  csv << "k";
  for (int i = 1; i <= spec.nx(); ++i) csv << ",x_" << i;
  for (int i = 1; i <= spec.nv(); ++i) csv << ",v_" << i;
  for (int i = 1; i <= spec.nw(); ++i) csv << ",w_" << i;
  csv << ",audit";
  for (size_t s = 1; s <= art.sweep.series.size(); ++s)
    csv << ",u@theta_" << s;
  csv << "\n";
  for (int k = 0; k < art.traj.size(); ++k) {
    csv << art.traj.steps[k];
    for (int i = 0; i < spec.nx(); ++i)
      csv << "," << fmt17(art.traj.states[k](i));
    for (int i = 0; i < spec.nv(); ++i)
      csv << "," << fmt17(art.traj.refs[k](i));
    for (int i = 0; i < spec.nw(); ++i)
      csv << "," << fmt17(art.traj.disturbances[k](i));
    csv << "," << static_cast<int>(art.audit[k]);
    for (const SweepSeries& s : art.sweep.series)
      csv << "," << fmt17(s.values[k]);
    csv << "\n";
  }
  write_text(csv_path, csv.str());

  DisturbanceKind kind = resolve_kind(o, spec);
  json meta = run_meta("run", r, o, art.moas_available ? &art.moas : nullptr,
                       kind, steps, art.ordering);
  meta["trajectory_file"] = csv_path.filename().string();
  meta["swept_constraint"] = art.sweep.constraint_name;
  json samples = json::array();
  for (const SweepSeries& s : art.sweep.series)
    samples.push_back(
        std::vector<double>(s.theta.data(), s.theta.data() + s.theta.size()));
  meta["theta_samples"] = samples;
  write_text(fs::path(o.out) / "trajectory.meta.json", meta.dump(2) + "\n");

  print_run_summary(r, art, steps);
  std::cout << "trajectory file: " << csv_path.string() << "\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  ResolvedProblem r = resolve_problem(o);
  const int steps = resolve_steps(o, r);
  SimArtifacts art = run_simulation(r, o, steps);

  fs::create_directories(o.out);
  fs::path csv_path = fs::path(o.out) / "sweep.csv";
  std::ostringstream csv;
  csv << "sample,k,value\n";
  for (size_t s = 0; s < art.sweep.series.size(); ++s)
    for (size_t k = 0; k < art.sweep.series[s].values.size(); ++k)
      csv << (s + 1) << "," << k << ","
          << fmt17(art.sweep.series[s].values[k]) << "\n";
  write_text(csv_path, csv.str());

  const int nt = r.spec.ntheta();
  fs::path sum_path = fs::path(o.out) / "sweep_summary.csv";
  std::ostringstream sum;
  sum << "sample";
  for (int t = 1; t <= nt; ++t) sum << ",theta_" << t;
  sum << ",max_abs\n";
  for (size_t s = 0; s < art.sweep.series.size(); ++s) {
    sum << (s + 1);
    for (int t = 0; t < nt; ++t)
      sum << "," << fmt17(art.sweep.series[s].theta(t));
    sum << "," << fmt17(art.sweep.series[s].max_abs) << "\n";
  }
  write_text(sum_path, sum.str());

  DisturbanceKind kind = resolve_kind(o, r.spec);
  json meta = run_meta("sweep", r, o, art.moas_available ? &art.moas : nullptr,
                       kind, steps, art.ordering);
  meta["sweep_file"] = csv_path.filename().string();
  meta["summary_file"] = sum_path.filename().string();
  meta["swept_constraint"] = art.sweep.constraint_name;
  write_text(fs::path(o.out) / "sweep.meta.json", meta.dump(2) + "\n");

  std::cout << "swept constraint: " << art.sweep.constraint_name << "\n";
  std::cout << "series: " << art.sweep.series.size() << "\n";
  double overall = 0.0;
  for (const SweepSeries& s : art.sweep.series)
    overall = std::max(overall, s.max_abs);
  std::cout << "max |value| over all samples: " << fmt17(overall) << "\n";
  std::cout << "sweep file: " << csv_path.string() << "\n";
  std::cout << "summary file: " << sum_path.string() << "\n";
  return 0;
}

int cmd_grid_init(const Options& o) {
  ResolvedProblem r = resolve_problem(o);
  const ProblemSpec& spec = r.spec;
  MoasBundle b = obtain_moas(r, o);
  LiftingMap lift = make_lifting_map(spec.nx(), spec.nv(), spec.degree);

  const int nx = spec.nx();
  const int P = o.grid_points;
  if (P < 2)
    throw Error(ErrorCode::InvalidArgument, "--grid-points must be >= 2");
  double total = std::pow(static_cast<double>(P), nx);
  if (total > 1e5)
    throw Error(ErrorCode::InvalidArgument,
                "grid too large (" + std::to_string(P) + "^" +
                    std::to_string(nx) + " points); lower --grid-points");

  fs::create_directories(o.out);
  fs::path csv_path = fs::path(o.out) / "grid_init.csv";
  std::ostringstream csv;
  csv << "";
  for (int i = 1; i <= nx; ++i) csv << (i > 1 ? "," : "") << "x_" << i;
  csv << ",feasible";
  for (int i = 1; i <= spec.nv(); ++i) csv << ",v_" << i;
  csv << "\n";

  int feasible_count = 0;
  std::vector<int> idx(nx, 0);
  int rows = 0;
  while (true) {
    Vec x0(nx);
    for (int i = 0; i < nx; ++i) {
      double a = b.state_box.lower(i), c = b.state_box.upper(i);
      x0(i) = a + (c - a) * idx[i] / (P - 1);
    }
    bool ok = true;
    Vec v0;
    try {
      v0 = init_reference(x0, b.poly, lift);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InadmissibleInitialState) throw;
      ok = false;
    }
    for (int i = 0; i < nx; ++i) csv << (i > 0 ? "," : "") << fmt17(x0(i));
    csv << "," << (ok ? 1 : 0);
    for (int i = 0; i < spec.nv(); ++i)
      csv << "," << (ok ? fmt17(v0(i)) : "nan");
    csv << "\n";
    ++rows;
    feasible_count += ok ? 1 : 0;

    int i = 0;
    while (i < nx && ++idx[i] == P) idx[i++] = 0;
    if (i == nx) break;
  }
  write_text(csv_path, csv.str());

  json meta =
      run_meta("grid-init", r, o, &b, DisturbanceKind::Zero, 0, lift.ordering);
  meta.erase("disturbance");
  meta.erase("seed");
  meta.erase("steps");
  meta["grid_points_per_dim"] = P;
  meta["grid_file"] = csv_path.filename().string();
  meta["state_box"] = box_to_json(b.state_box);
  write_text(fs::path(o.out) / "grid_init.meta.json", meta.dump(2) + "\n");

  std::cout << "grid points: " << rows << " (" << P << " per dimension)\n";
  std::cout << "feasible: " << feasible_count << "\n";
  std::cout << "grid file: " << csv_path.string() << "\n";
  return 0;
}

struct CalibrationTargets {
  int lin_t_star;
  int lin_rows;
  int lin_rows_tol;
  int rob_iters;
  int rob_iters_tol;
  int rob_rows;
  double rob_rows_rel_tol;
};

int cmd_calibrate_beta(const Options& o) {
  const CalibrationTargets nominal_t{75, 105, 10, 42, 3, 2062, 0.05};
  const CalibrationTargets disturbed_t{47, 81, 10, 50, 3, 14067, 0.05};
  const double betas[] = {0.90, 0.95, 0.99};

  fs::create_directories(o.out);
  std::ostringstream csv;
  csv << "beta,variant,status,linear_t_star,linear_rows,robust_iterations,"
         "robust_rows,within_targets\n";

  std::cout << "beta    variant     stage-one          stage-two          "
               "targets   status\n";

  double best_score[2] = {std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
  double best_beta[2] = {0.0, 0.0};
  bool any_within[2] = {false, false};

  for (double beta : betas) {
    for (int variant = 0; variant < 2; ++variant) {
      const bool disturbed = variant == 1;
      const CalibrationTargets& tg = disturbed ? disturbed_t : nominal_t;
      AircraftPreset preset;
      preset.beta = beta;
      ProblemSpec spec = build_aircraft_problem(preset, disturbed);
      MoasOptions opt;
      opt.eps = o.eps;
      opt.iteration_cap = o.cap;

      std::string status = "ok";
      int lt = -1, lr = -1, ri = -1, rr = -1;
      bool within = false;
      double score = std::numeric_limits<double>::infinity();
      try {
        GovernorSetReport rep = build_governor_set(spec, opt);
        lt = rep.linear.t_star;
        lr = rep.linear.rows_after;
        ri = rep.robust.iterations;
        rr = rep.robust.rows_after;
        within = lt == tg.lin_t_star &&
                 std::abs(lr - tg.lin_rows) <= tg.lin_rows_tol &&
                 std::abs(ri - tg.rob_iters) <= tg.rob_iters_tol &&
                 std::abs(rr - tg.rob_rows) <=
                     tg.rob_rows_rel_tol * tg.rob_rows;
        score = std::abs(lt - tg.lin_t_star) / double(tg.lin_t_star) +
                std::abs(lr - tg.lin_rows) / double(tg.lin_rows) +
                std::abs(ri - tg.rob_iters) / double(tg.rob_iters) +
                std::abs(rr - tg.rob_rows) / double(tg.rob_rows);
      } catch (const Error& e) {
        status = std::string("error: ") + e.what();
      }
      if (score < best_score[variant]) {
        best_score[variant] = score;
        best_beta[variant] = beta;
      }
      any_within[variant] = any_within[variant] || within;

      const char* vname = disturbed ? "disturbed" : "nominal";
      std::ostringstream stage1, stage2;
      if (lt >= 0) {
        stage1 << "t*=" << lt << " rows=" << lr;
        stage2 << "it=" << ri << " rows=" << rr;
      } else {
        stage1 << "-";
        stage2 << "-";
      }
      char line[512];
      std::snprintf(line, sizeof line, "%-7.2f %-11s %-18s %-18s %-9s %s\n",
                    beta, vname, stage1.str().c_str(), stage2.str().c_str(),
                    within ? "within" : "outside", status.c_str());
      std::cout << line;

      csv << fmt17(beta) << "," << vname << ",\"" << status << "\"," << lt
          << "," << lr << "," << ri << "," << rr << ","
          << (within ? 1 : 0) << "\n";
    }
  }

  write_text(fs::path(o.out) / "calibration.csv", csv.str());
  for (int variant = 0; variant < 2; ++variant) {
    const char* vname = variant == 1 ? "disturbed" : "nominal";
    char bstr[32];
    std::snprintf(bstr, sizeof bstr, "%.2f", best_beta[variant]);
    if (any_within[variant])
      std::cout << vname << ": targets reproduced at beta=" << bstr << "\n";
    else if (std::isfinite(best_score[variant]))
      std::cout << vname << ": no beta in the sweep reproduces the targets; "
                << "nearest is beta=" << bstr << "\n";
    else
      std::cout << vname
                << ": no beta in the sweep yields a feasible construction\n";
  }
  std::cout << "calibration file: "
            << (fs::path(o.out) / "calibration.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reference governor toolkit for constrained linear loops"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options o;

  CLI::App* build = app.add_subcommand(
      "build-moas", "construct and cache the admissible polytope");
  CLI::App* run = app.add_subcommand(
      "run", "simulate the governed (or ungoverned) closed loop");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "evaluate the uncertain constraint family along a run");
  CLI::App* grid = app.add_subcommand(
      "grid-init", "tabulate feasible initial references over a state grid");
  CLI::App* calib = app.add_subcommand(
      "calibrate-beta", "sweep the decay factor against published set sizes");
  for (CLI::App* cmd : {build, run, sweep, grid, calib}) add_common(cmd, o);
  sweep->add_flag("--vertices-only", o.vertices_only,
                  "sample only the theta-box vertices (no midpoint)");
  sweep->add_option("--theta", o.theta_text,
                    "single theta sample, comma separated")
      ->envname("RGOV_THETA");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (build->parsed()) return cmd_build_moas(o);
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (grid->parsed()) return cmd_grid_init(o);
    return cmd_calibrate_beta(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
