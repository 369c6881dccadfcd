#pragma once

// Real standard-form conic program consumed by solver backends:
//
//   minimize   sum_j <C_j, X_j> + f^T z + c0
//   subject to sum_j <A_ij, X_j> + g_i^T z = b_i      for every row i
//              X_j symmetric positive semidefinite,   z free.
//
// The dual is  maximize b^T y + c0  s.t.  C_j - sum_i y_i A_ij = S_j >= 0,  G^T y = f.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace outcomes::conic {

struct StandardRow {
  std::vector<std::pair<int, Eigen::MatrixXd>> blocks;  // (block index, symmetric coefficient)
  std::vector<std::pair<int, double>> free;             // (free index, coefficient)
  double rhs = 0.0;
  std::string label;
};

struct StandardForm {
  std::vector<int> block_dims;
  int num_free = 0;
  std::vector<StandardRow> rows;
  std::vector<Eigen::MatrixXd> objective_blocks;  // one per block
  Eigen::VectorXd objective_free;                 // length num_free
  double objective_constant = 0.0;
};

enum class SolverStatus { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::infeasible: return "infeasible";
    case SolverStatus::unbounded: return "unbounded";
    case SolverStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

struct SolverOptions {
  double tol = 1e-8;            // acceptance threshold for infeasibilities and relative gap
  double target = 1e-11;        // iteration keeps going until this is met or progress stalls
  int max_iterations = 120;
  double centering_floor = 1e-4; // lower bound on the centering parameter sigma
  double step_fraction = 0.98;
  bool verbose = false;         // per-iteration trace on stderr
};

struct StandardSolution {
  SolverStatus status = SolverStatus::numerical_failure;
  std::vector<Eigen::MatrixXd> x;  // primal blocks
  std::vector<Eigen::MatrixXd> s;  // dual slack blocks
  Eigen::VectorXd z;               // free primal variables
  Eigen::VectorXd y;               // row multipliers
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;  // ||r_p|| / (1 + ||b||)
  double dual_infeasibility = 0.0;    // ||r_d|| / (1 + ||C||)
  double relative_gap = 0.0;          // |p - d| / (1 + |p| + |d|)
  int iterations = 0;
  int removed_rows = 0;
  int fixed_free = 0;
  std::vector<std::string> log;
};

/// Pluggable backend interface.
class SdpBackend {
public:
  virtual ~SdpBackend() = default;
  virtual StandardSolution solve(const StandardForm& problem, const SolverOptions& options) const = 0;
  virtual std::string name() const = 0;
};

} // namespace outcomes::conic
