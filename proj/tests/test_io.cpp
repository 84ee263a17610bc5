#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rgov/problem_io.hpp"
#include "rgov/sim.hpp"

using namespace rgov;

namespace {

void expect_parse_error(const std::string& text, const std::string& needle) {
  try {
    parse_problem(text);
    FAIL_CHECK("expected rejection mentioning '" << needle << "'");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

// Minimal valid document the mutation tests edit.
std::string minimal_doc() {
  return R"({
    "A": [[0.5]],
    "B": [[1.0]],
    "beta": 0.9,
    "degree": 2,
    "theta_box": {"lower": [0.0], "upper": [1.0]},
    "constraints": [
      {"name": "band", "h": 1.0,
       "terms": [{"theta_index": null, "exponents": [1, 0], "coeff": 1.0}]}
    ]
  })";
}

}  // namespace

TEST_CASE("a full problem survives the save/parse round trip") {
  AircraftPreset preset;
  for (bool disturbed : {false, true}) {
    ProblemSpec spec = build_aircraft_problem(preset, disturbed);
    ProblemSpec back = parse_problem(problem_to_json(spec));

    CHECK((back.A - spec.A).norm() == 0.0);
    CHECK((back.B - spec.B).norm() == 0.0);
    CHECK((back.Bw - spec.Bw).norm() == 0.0);
    CHECK(back.beta == spec.beta);
    CHECK(back.degree == spec.degree);
    CHECK((back.theta_box.lower - spec.theta_box.lower).norm() == 0.0);
    CHECK((back.theta_box.upper - spec.theta_box.upper).norm() == 0.0);
    CHECK((back.w_box.lower - spec.w_box.lower).norm() == 0.0);
    CHECK((back.w_box.upper - spec.w_box.upper).norm() == 0.0);
    REQUIRE(back.constraints.size() == spec.constraints.size());
    for (size_t i = 0; i < spec.constraints.size(); ++i) {
      const PolyConstraint& a = spec.constraints[i];
      const PolyConstraint& b = back.constraints[i];
      CHECK(a.name == b.name);
      CHECK(a.h == b.h);
      auto pad = [&](const Vec& v) {
        return v.size() ? v : Vec(Vec::Zero(spec.ntheta()));
      };
      CHECK((pad(a.d0) - pad(b.d0)).norm() == 0.0);
      REQUIRE(a.c.size() == b.c.size());
      for (const auto& [deg, row] : a.c)
        CHECK((row - b.c.at(deg)).norm() == 0.0);
      REQUIRE(a.d.size() == b.d.size());
      for (const auto& [deg, row] : a.d)
        CHECK((row - b.d.at(deg)).norm() == 0.0);
    }

    // Serialization is canonical: repeated dumps are byte-identical, and the
    // reparsed copy dumps to the same bytes.
    std::string one = problem_to_json(spec);
    std::string two = problem_to_json(spec);
    CHECK(one == two);
    CHECK(problem_to_json(back) == one);
  }
}

TEST_CASE("file level load and save") {
  AircraftPreset preset;
  ProblemSpec spec = build_aircraft_problem(preset, true);
  auto path = std::filesystem::temp_directory_path() / "rgov_problem.json";
  save_problem(path, spec);
  ProblemSpec back = load_problem(path);
  CHECK(back.constraints.size() == 4);
  CHECK(problem_to_json(back) == problem_to_json(spec));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_problem(path), Error);
}

TEST_CASE("minimal document parses with defaults") {
  ProblemSpec spec = parse_problem(minimal_doc());
  CHECK(spec.nx() == 1);
  CHECK(spec.nv() == 1);
  CHECK(spec.ntheta() == 1);
  CHECK(spec.nw() == 0);           // Bw defaults to an empty block
  CHECK(spec.w_box.size() == 0);   // and the disturbance box follows it
  CHECK(spec.constraints[0].name == "band");
  CHECK(spec.constraints[0].c.at(1)(0) == 1.0);
}

TEST_CASE("unknown fields are rejected at every level") {
  std::string doc = minimal_doc();
  doc.insert(doc.rfind('}'), R"(, "extra": 1)");
  expect_parse_error(doc, "problem.extra");

  doc = minimal_doc();
  doc.replace(doc.find("\"lower\""), 7, "\"lwr\"");
  expect_parse_error(doc, "theta_box.lwr");

  doc = minimal_doc();
  doc.replace(doc.find("\"name\""), 6, "\"label\"");
  expect_parse_error(doc, "constraints[0].label");

  doc = minimal_doc();
  doc.replace(doc.find("\"coeff\""), 7, "\"weight\"");
  expect_parse_error(doc, "terms[0].weight");
}

TEST_CASE("malformed documents name the offending field") {
  expect_parse_error("not json", "not valid JSON");
  expect_parse_error("[1,2]", "top level");

  std::string doc = minimal_doc();
  doc.replace(doc.find("\"A\""), 3, "\"A_\"");
  expect_parse_error(doc, "problem.A_");  // unknown key, A now missing

  // Ragged matrix.
  doc = minimal_doc();
  doc.replace(doc.find("[[0.5]]"), 7, "[[0.5],[1.0,2.0]]");
  expect_parse_error(doc, "ragged");

  // Non-numeric bound.
  doc = minimal_doc();
  doc.replace(doc.find("0.9"), 3, "\"x\"");
  expect_parse_error(doc, "problem.beta");

  // Fractional degree.
  doc = minimal_doc();
  doc.replace(doc.find("\"degree\": 2"), 11, "\"degree\": 2.5");
  expect_parse_error(doc, "problem.degree");

  // theta_index out of range.
  doc = minimal_doc();
  doc.replace(doc.find("\"theta_index\": null"), 19, "\"theta_index\": 3");
  expect_parse_error(doc, "theta_index");

  // Exponent list length must match the joint state dimension.
  doc = minimal_doc();
  doc.replace(doc.find("[1, 0]"), 6, "[1, 0, 0]");
  expect_parse_error(doc, "exponents");

  // Term degree beyond the declared problem degree.
  doc = minimal_doc();
  doc.replace(doc.find("[1, 0]"), 6, "[2, 1]");
  expect_parse_error(doc, "degree");

  // Negative exponents.
  doc = minimal_doc();
  doc.replace(doc.find("[1, 0]"), 6, "[-1, 0]");
  expect_parse_error(doc, "exponents");

  // Negative constraint levels fail validation.
  doc = minimal_doc();
  doc.replace(doc.find("\"h\": 1.0"), 8, "\"h\": -1.0");
  expect_parse_error(doc, ".h");
}

TEST_CASE("constant terms fold into the bound") {
  std::string doc = R"({
    "A": [[0.5]],
    "B": [[1.0]],
    "beta": 0.9,
    "degree": 1,
    "theta_box": {"lower": [0.0], "upper": [1.0]},
    "constraints": [
      {"h": 1.0,
       "terms": [{"theta_index": null, "exponents": [0, 0], "coeff": 0.25},
                 {"theta_index": 0, "exponents": [0, 0], "coeff": 2.0},
                 {"theta_index": null, "exponents": [1, 0], "coeff": 1.0}]}
    ]
  })";
  ProblemSpec spec = parse_problem(doc);
  const PolyConstraint& con = spec.constraints[0];
  CHECK(con.h == 0.75);            // 1.0 - 0.25
  CHECK(con.d0(0) == 2.0);         // constant theta term stays symbolic
  CHECK(con.name == "c0");         // default name
  CHECK(con.c.at(1)(0) == 1.0);

  // Repeated identical terms accumulate.
  std::string twice = doc;
  twice.replace(twice.find("\"coeff\": 1.0"), 12,
                "\"coeff\": 1.0}, {\"theta_index\": null, "
                "\"exponents\": [1, 0], \"coeff\": 0.5");
  ProblemSpec spec2 = parse_problem(twice);
  CHECK(spec2.constraints[0].c.at(1)(0) == 1.5);
}

TEST_CASE("stable fingerprint of canonical bytes") {
  // Frozen values from an independent implementation.
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("a") == 12638187200555641996ULL);
  CHECK(fnv1a("hello") == 11831194018420276491ULL);
  CHECK(fnv1a("polytope v1\n") == 17410198692075860936ULL);

  AircraftPreset preset;
  ProblemSpec spec = build_aircraft_problem(preset, false);
  CHECK(fnv1a(problem_to_json(spec)) == fnv1a(problem_to_json(spec)));
  ProblemSpec other = build_aircraft_problem(preset, true);
  CHECK(fnv1a(problem_to_json(spec)) != fnv1a(problem_to_json(other)));
}
