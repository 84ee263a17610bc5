#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rgov {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

// Axis-aligned box { z : lower <= z <= upper }.
struct Box {
  Vec lower;
  Vec upper;
  int size() const { return static_cast<int>(lower.size()); }
  bool is_zero() const {
    return lower.size() == 0 ||
           (lower.lpNorm<Eigen::Infinity>() == 0.0 &&
            upper.lpNorm<Eigen::Infinity>() == 0.0);
  }
};

enum class ErrorCode {
  InvalidArgument,    // bad user input (config, problem file, dimensions)
  Overflow,           // integer overflow in a dimension computation
  TightenedInfeasible,  // constraint tightening emptied the admissible set
  NotFinitelyDetermined,  // iteration cap hit before the stopping certificate
  UnboundedCoordinate,    // box extraction on an unbounded polytope
  InadmissibleInitialState,
  NumericalFailure,   // degenerate LP or failed certificate re-check
};

// Single exception type; `code` routes CLI exit codes and lets tests assert
// on failure identity without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rgov
