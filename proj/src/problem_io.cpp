#include "rgov/problem_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rgov/polykron.hpp"

namespace rgov {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, where + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) fail(where + "." + key, "unknown field");
}

double number_at(const json& obj, const std::string& key,
                 const std::string& where) {
  if (!obj.contains(key)) fail(where + "." + key, "missing");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

Mat matrix_at(const json& obj, const std::string& key,
              const std::string& where, bool required) {
  if (!obj.contains(key)) {
    if (required) fail(where + "." + key, "missing");
    return Mat(0, 0);
  }
  const json& rows = obj.at(key);
  const std::string at = where + "." + key;
  if (!rows.is_array()) fail(at, "expected an array of rows");
  const int m = static_cast<int>(rows.size());
  int n = -1;
  Mat out;
  for (int i = 0; i < m; ++i) {
    const json& row = rows.at(i);
    if (!row.is_array()) fail(at, "row " + std::to_string(i) + " is not an array");
    if (n < 0) {
      n = static_cast<int>(row.size());
      out.resize(m, n);
    }
    if (static_cast<int>(row.size()) != n)
      fail(at, "row " + std::to_string(i) + " has ragged length");
    for (int j = 0; j < n; ++j) {
      if (!row.at(j).is_number()) fail(at, "non-numeric entry");
      out(i, j) = row.at(j).get<double>();
    }
  }
  if (m == 0) out.resize(0, 0);
  return out;
}

Vec vector_at(const json& obj, const std::string& key,
              const std::string& where) {
  if (!obj.contains(key)) fail(where + "." + key, "missing");
  const json& arr = obj.at(key);
  if (!arr.is_array()) fail(where + "." + key, "expected an array");
  Vec out(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr.at(i).is_number()) fail(where + "." + key, "non-numeric entry");
    out(static_cast<int>(i)) = arr.at(i).get<double>();
  }
  return out;
}

Box box_at(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where + "." + key, "missing");
  const json& b = obj.at(key);
  const std::string at = where + "." + key;
  if (!b.is_object()) fail(at, "expected an object with lower/upper");
  reject_unknown(b, {"lower", "upper"}, at);
  Box box;
  box.lower = vector_at(b, "lower", at);
  box.upper = vector_at(b, "upper", at);
  if (box.lower.size() != box.upper.size()) fail(at, "lower/upper length mismatch");
  return box;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("problem", "top level must be an object");
  reject_unknown(root,
                 {"A", "B", "Bw", "beta", "degree", "theta_box", "w_box",
                  "constraints"},
                 "problem");

  ProblemSpec spec;
  spec.A = matrix_at(root, "A", "problem", true);
  spec.B = matrix_at(root, "B", "problem", true);
  spec.Bw = matrix_at(root, "Bw", "problem", false);
  if (spec.Bw.size() == 0) spec.Bw = Mat::Zero(spec.A.rows(), 0);
  spec.beta = number_at(root, "beta", "problem");
  if (!root.contains("degree") || !root.at("degree").is_number_integer())
    fail("problem.degree", "missing or not an integer");
  spec.degree = root.at("degree").get<int>();
  spec.theta_box = box_at(root, "theta_box", "problem");
  if (root.contains("w_box")) {
    spec.w_box = box_at(root, "w_box", "problem");
  } else {
    spec.w_box.lower = Vec::Zero(spec.Bw.cols());
    spec.w_box.upper = Vec::Zero(spec.Bw.cols());
  }

  if (!root.contains("constraints") || !root.at("constraints").is_array())
    fail("problem.constraints", "missing or not an array");
  const int n = static_cast<int>(spec.A.rows() + spec.B.cols());
  const int ntheta = spec.theta_box.size();

  int ci = 0;
  for (const json& jc : root.at("constraints")) {
    const std::string where = "constraints[" + std::to_string(ci) + "]";
    if (!jc.is_object()) fail(where, "expected an object");
    reject_unknown(jc, {"name", "h", "terms"}, where);
    PolyConstraint con;
    con.name = jc.contains("name") ? jc.at("name").get<std::string>()
                                   : "c" + std::to_string(ci);
    con.h = number_at(jc, "h", where);
    if (ntheta > 0) con.d0 = Vec::Zero(ntheta);
    if (!jc.contains("terms") || !jc.at("terms").is_array())
      fail(where + ".terms", "missing or not an array");

    int ti = 0;
    for (const json& jt : jc.at("terms")) {
      const std::string at = where + ".terms[" + std::to_string(ti) + "]";
      if (!jt.is_object()) fail(at, "expected an object");
      reject_unknown(jt, {"theta_index", "exponents", "coeff"}, at);
      const double coeff = number_at(jt, "coeff", at);
      int theta_index = -1;
      if (jt.contains("theta_index") && !jt.at("theta_index").is_null()) {
        if (!jt.at("theta_index").is_number_integer())
          fail(at + ".theta_index", "expected an integer or null");
        theta_index = jt.at("theta_index").get<int>();
        if (theta_index < 0 || theta_index >= ntheta)
          fail(at + ".theta_index", "out of range for the theta box");
      }
      if (!jt.contains("exponents") || !jt.at("exponents").is_array())
        fail(at + ".exponents", "missing or not an array");
      std::vector<int> exps;
      int degree = 0;
      for (const json& je : jt.at("exponents")) {
        if (!je.is_number_integer() || je.get<int>() < 0)
          fail(at + ".exponents", "entries must be nonnegative integers");
        exps.push_back(je.get<int>());
        degree += exps.back();
      }
      if (static_cast<int>(exps.size()) != n)
        fail(at + ".exponents",
             "length " + std::to_string(exps.size()) + " != joint state dim " +
                 std::to_string(n));
      if (degree > spec.degree)
        fail(at, "term degree exceeds the declared problem degree");

      if (degree == 0) {
        if (theta_index < 0)
          con.h -= coeff;  // constant folds into the bound
        else
          con.d0(theta_index) += coeff;
        ++ti;
        continue;
      }
      const PowerBasis basis = power_basis(n, degree);
      const int m = basis.index_of(exps);
      if (theta_index < 0) {
        if (!con.c.count(degree)) con.c[degree] = Vec::Zero(basis.size());
        con.c[degree](m) += coeff;
      } else {
        if (!con.d.count(degree))
          con.d[degree] = Vec::Zero(ntheta * basis.size());
        con.d[degree](theta_index * basis.size() + m) += coeff;
      }
      ++ti;
    }
    spec.constraints.push_back(std::move(con));
    ++ci;
  }

  spec.validate();
  return spec;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::InvalidArgument,
                "cannot open problem file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string problem_to_json(const ProblemSpec& spec) {
  json root;
  root["A"] = matrix_to_json(spec.A);
  root["B"] = matrix_to_json(spec.B);
  root["Bw"] = matrix_to_json(spec.Bw);
  root["beta"] = spec.beta;
  root["degree"] = spec.degree;
  root["theta_box"] = {{"lower", vector_to_json(spec.theta_box.lower)},
                       {"upper", vector_to_json(spec.theta_box.upper)}};
  root["w_box"] = {{"lower", vector_to_json(spec.w_box.lower)},
                   {"upper", vector_to_json(spec.w_box.upper)}};
  json cons = json::array();
  for (const PolyConstraint& con : spec.constraints) {
    json jc;
    jc["name"] = con.name;
    jc["h"] = con.h;
    json terms = json::array();
    for (int t = 0; t < con.d0.size(); ++t) {
      if (con.d0(t) == 0.0) continue;
      json jt;
      jt["theta_index"] = t;
      jt["exponents"] = std::vector<int>(spec.n(), 0);
      jt["coeff"] = con.d0(t);
      terms.push_back(std::move(jt));
    }
    for (const auto& [degree, row] : con.c) {
      const PowerBasis basis = power_basis(spec.n(), degree);
      for (int m = 0; m < basis.size(); ++m) {
        if (row(m) == 0.0) continue;
        json jt;
        jt["theta_index"] = nullptr;
        jt["exponents"] = basis.monomials[m].exponents;
        jt["coeff"] = row(m);
        terms.push_back(std::move(jt));
      }
    }
    for (const auto& [degree, row] : con.d) {
      const PowerBasis basis = power_basis(spec.n(), degree);
      for (int t = 0; t < spec.ntheta(); ++t)
        for (int m = 0; m < basis.size(); ++m) {
          const double val = row(t * basis.size() + m);
          if (val == 0.0) continue;
          json jt;
          jt["theta_index"] = t;
          jt["exponents"] = basis.monomials[m].exponents;
          jt["coeff"] = val;
          terms.push_back(std::move(jt));
        }
    }
    jc["terms"] = std::move(terms);
    cons.push_back(std::move(jc));
  }
  root["constraints"] = std::move(cons);
  return root.dump(2) + "\n";
}

void save_problem(const std::filesystem::path& path, const ProblemSpec& spec) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::InvalidArgument,
                "cannot open for writing: " + path.string());
  out << problem_to_json(spec);
  if (!out)
    throw Error(ErrorCode::NumericalFailure, "write failed: " + path.string());
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace rgov
