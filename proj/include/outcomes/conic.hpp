#pragma once

// Complex-domain SDP modeling on top of a real standard-form backend.
//
// Model builders declare Hermitian variables (PSD or free), write Hermitian- or real-valued
// affine constraints and a real linear objective, and never see the real embedding. Each PSD
// Hermitian d x d variable V becomes a real symmetric 2d x 2d block X; trace functionals
// carry the factor 1/2 because the embedding doubles every eigenvalue:
//
//   tr(A V) = <embed(A), X> / 2,   V = (X11 + X22)/2 + i (X21 - X12)/2.
//
// A Hermitian-valued equality E = 0 on d x d matrices is expanded into d^2 real rows
// tr(B_r E) = 0 over an orthonormal Hermitian basis {B_r}. An LMI E >= 0 gets a PSD slack.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "outcomes/errors.hpp"
#include "outcomes/interior_point.hpp"
#include "outcomes/quantum.hpp"
#include "outcomes/standard_form.hpp"

namespace outcomes::conic {

/// [[Re H, -Im H], [Im H, Re H]]
inline RMatrix embed_hermitian(const HermitianMatrix& h) {
  const int d = h.dim();
  const RMatrix re = h.matrix().real();
  const RMatrix im = h.matrix().imag();
  RMatrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = re;
  out.topRightCorner(d, d) = -im;
  out.bottomLeftCorner(d, d) = im;
  out.bottomRightCorner(d, d) = re;
  return out;
}

/// Inverse of embed_hermitian, projecting an arbitrary symmetric 2d x 2d matrix onto the
/// embedded subspace (symmetrized real part, antisymmetrized imaginary part).
inline HermitianMatrix extract_hermitian(const RMatrix& x) {
  if (x.rows() != x.cols() || x.rows() % 2 != 0) throw DomainError("extract_hermitian: need an even square matrix");
  const int d = static_cast<int>(x.rows()) / 2;
  RMatrix re = 0.5 * (x.topLeftCorner(d, d) + x.bottomRightCorner(d, d));
  RMatrix im = 0.5 * (x.bottomLeftCorner(d, d) - x.topRightCorner(d, d));
  re = 0.5 * (re + re.transpose()).eval();
  im = 0.5 * (im - im.transpose()).eval();
  CMatrix c(d, d);
  c.real() = re;
  c.imag() = im;
  return HermitianMatrix::hermitian_part(c);
}

/// Orthonormal basis of d x d Hermitian matrices under (A, B) -> tr(AB), d^2 elements:
/// diagonal units, then (E_ij + E_ji)/sqrt2 and i(E_ij - E_ji)/sqrt2 for i < j.
inline std::vector<HermitianMatrix> hermitian_basis(int d) {
  std::vector<HermitianMatrix> basis;
  basis.reserve(d * d);
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    CMatrix e = CMatrix::Zero(d, d);
    e(i, i) = 1.0;
    basis.emplace_back(e);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, j) = s;
      e(j, i) = s;
      basis.emplace_back(e);
      CMatrix f = CMatrix::Zero(d, d);
      f(i, j) = Complex(0, s);
      f(j, i) = Complex(0, -s);
      basis.emplace_back(f);
    }
  return basis;
}

enum class VarKind { psd, free };
enum class Sense { minimize, maximize };

struct Variable {
  std::string name;
  int dim;
  VarKind kind;
};

/// K + sum_k c_k V_k + sum_k tr(W_k V_k) H_k, Hermitian-valued with fixed dimension.
class HermExpr {
public:
  explicit HermExpr(int dim) : constant_(HermitianMatrix::zero(dim)) {}

  HermExpr& add(int var, double coeff) {
    scale_.push_back({var, coeff});
    return *this;
  }
  HermExpr& add_trace(int var, HermitianMatrix weight, HermitianMatrix direction) {
    trace_.push_back({var, std::move(weight), std::move(direction)});
    return *this;
  }
  HermExpr& add_constant(const HermitianMatrix& k) {
    constant_ += k;
    return *this;
  }

  int dim() const { return constant_.dim(); }

  struct Scale {
    int var;
    double coeff;
  };
  struct Trace {
    int var;
    HermitianMatrix weight;
    HermitianMatrix direction;
  };
  const HermitianMatrix& constant() const { return constant_; }
  const std::vector<Scale>& scale_terms() const { return scale_; }
  const std::vector<Trace>& trace_terms() const { return trace_; }

private:
  HermitianMatrix constant_;
  std::vector<Scale> scale_;
  std::vector<Trace> trace_;
};

/// c + sum_k tr(A_k V_k), real-valued.
class ScalarExpr {
public:
  ScalarExpr& add(int var, HermitianMatrix weight) {
    terms_.emplace_back(var, std::move(weight));
    return *this;
  }
  ScalarExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }
  double constant() const { return constant_; }
  const std::vector<std::pair<int, HermitianMatrix>>& terms() const { return terms_; }

private:
  double constant_ = 0.0;
  std::vector<std::pair<int, HermitianMatrix>> terms_;
};

struct SdpSolution {
  SolverStatus status = SolverStatus::numerical_failure;
  double objective_value = 0.0;  // primal, in the problem's own sense
  double dual_value = 0.0;       // dual bound, same sense
  double gap = 0.0;              // relative: |p - d| / (1 + |p| + |d|)
  double absolute_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  std::vector<HermitianMatrix> values;            // per declared variable
  std::vector<HermitianMatrix> constraint_duals;  // per constraint (1x1 for scalar rows)
  int iterations = 0;
  int retries = 0;
  std::vector<std::string> log;

  bool optimal() const { return status == SolverStatus::optimal; }
};

struct FeasibilityReport {
  double max_equality_residual = 0.0;
  double min_psd_eigenvalue = 0.0;  // over PSD variables
  double min_lmi_eigenvalue = 0.0;  // over LMI constraints
  double objective = 0.0;

  bool feasible(double tol) const {
    return max_equality_residual <= tol && min_psd_eigenvalue >= -tol && min_lmi_eigenvalue >= -tol;
  }
  bool strictly_feasible(double tol) const {
    return max_equality_residual <= tol && min_psd_eigenvalue > tol && min_lmi_eigenvalue > tol;
  }
};

/// A conic program over Hermitian variables: PSD cones, free blocks, linear equalities, LMIs.
class SdpProblem {
public:
  enum class ConstraintKind { hermitian_equality, scalar_equality, lmi };

  int add_psd(std::string name, int dim) { return add_var(std::move(name), dim, VarKind::psd); }
  int add_free(std::string name, int dim) { return add_var(std::move(name), dim, VarKind::free); }

  void add_equality(HermExpr e, std::string name = {}) {
    check(e);
    constraints_.push_back({ConstraintKind::hermitian_equality, std::move(name), std::move(e), {}});
  }
  void add_equality(ScalarExpr e, std::string name = {}) {
    check(e);
    constraints_.push_back({ConstraintKind::scalar_equality, std::move(name), HermExpr(1), std::move(e)});
  }
  /// e >= 0 in the PSD order.
  void add_lmi(HermExpr e, std::string name = {}) {
    check(e);
    constraints_.push_back({ConstraintKind::lmi, std::move(name), std::move(e), {}});
  }
  void set_objective(Sense sense, ScalarExpr e) {
    check(e);
    sense_ = sense;
    objective_ = std::move(e);
  }

  Sense sense() const { return sense_; }
  const std::vector<Variable>& variables() const { return vars_; }
  int num_psd() const { return count_vars(VarKind::psd); }
  int num_free() const { return count_vars(VarKind::free); }
  int num_lmi() const { return count_constraints(ConstraintKind::lmi); }
  int num_equalities() const {
    return count_constraints(ConstraintKind::hermitian_equality) + count_constraints(ConstraintKind::scalar_equality);
  }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  ConstraintKind constraint_kind(int i) const { return constraints_.at(i).kind; }
  const std::string& constraint_name(int i) const { return constraints_.at(i).name; }

  HermitianMatrix evaluate(const HermExpr& e, const std::vector<HermitianMatrix>& values) const {
    CMatrix acc = e.constant().matrix();
    for (const auto& t : e.scale_terms()) acc += t.coeff * values.at(t.var).matrix();
    for (const auto& t : e.trace_terms())
      acc += trace_product(t.weight, values.at(t.var)) * t.direction.matrix();
    return HermitianMatrix::hermitian_part(acc);
  }
  double evaluate(const ScalarExpr& e, const std::vector<HermitianMatrix>& values) const {
    double acc = e.constant();
    for (const auto& [v, w] : e.terms()) acc += trace_product(w, values.at(v));
    return acc;
  }

  /// Residuals and cone margins of a candidate point (one value per declared variable).
  FeasibilityReport check_point(const std::vector<HermitianMatrix>& values) const {
    if (values.size() != vars_.size()) throw DomainError("check_point: one value per variable required");
    FeasibilityReport r;
    r.min_psd_eigenvalue = std::numeric_limits<double>::infinity();
    r.min_lmi_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (values[i].dim() != vars_[i].dim) throw DomainError("check_point: dimension mismatch");
      if (vars_[i].kind == VarKind::psd) r.min_psd_eigenvalue = std::min(r.min_psd_eigenvalue, min_eigenvalue(values[i]));
    }
    for (const auto& c : constraints_) {
      switch (c.kind) {
        case ConstraintKind::hermitian_equality:
          r.max_equality_residual = std::max(r.max_equality_residual, evaluate(c.herm, values).matrix().cwiseAbs().maxCoeff());
          break;
        case ConstraintKind::scalar_equality:
          r.max_equality_residual = std::max(r.max_equality_residual, std::abs(evaluate(c.scalar, values)));
          break;
        case ConstraintKind::lmi:
          r.min_lmi_eigenvalue = std::min(r.min_lmi_eigenvalue, min_eigenvalue(evaluate(c.herm, values)));
          break;
      }
    }
    r.objective = evaluate(objective_, values);
    return r;
  }

  /// Lowers to real standard form (minimization). Blocks: PSD variables in declaration
  /// order, then one slack per LMI. Free coordinates: hermitian_basis(d) per free variable.
  StandardForm to_standard_form() const {
    StandardForm sf;
    std::vector<int> block_of(vars_.size(), -1), free_offset(vars_.size(), -1);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i].kind == VarKind::psd) {
        block_of[i] = static_cast<int>(sf.block_dims.size());
        sf.block_dims.push_back(2 * vars_[i].dim);
      } else {
        free_offset[i] = sf.num_free;
        sf.num_free += vars_[i].dim * vars_[i].dim;
      }
    }
    std::vector<int> slack_block(constraints_.size(), -1);
    for (std::size_t c = 0; c < constraints_.size(); ++c)
      if (constraints_[c].kind == ConstraintKind::lmi) {
        slack_block[c] = static_cast<int>(sf.block_dims.size());
        sf.block_dims.push_back(2 * constraints_[c].herm.dim());
      }

    // Accumulates sum_v tr(A_v V_v) into a standard row.
    auto emit = [&](StandardRow& row, const std::vector<std::pair<int, HermitianMatrix>>& coeffs) {
      for (const auto& [v, a] : coeffs) {
        if (vars_[v].kind == VarKind::psd) {
          row.blocks.emplace_back(block_of[v], 0.5 * embed_hermitian(a));
        } else {
          const auto basis = basis_cache(vars_[v].dim);
          for (std::size_t s = 0; s < basis.size(); ++s) {
            const double coeff = trace_product(a, basis[s]);
            if (coeff != 0.0) row.free.emplace_back(free_offset[v] + static_cast<int>(s), coeff);
          }
        }
      }
    };

    for (std::size_t c = 0; c < constraints_.size(); ++c) {
      const auto& con = constraints_[c];
      const std::string base = con.name.empty() ? "c" + std::to_string(c) : con.name;
      if (con.kind == ConstraintKind::scalar_equality) {
        StandardRow row;
        row.label = base;
        emit(row, con.scalar.terms());
        row.rhs = -con.scalar.constant();
        sf.rows.push_back(std::move(row));
        continue;
      }
      const auto& e = con.herm;
      const auto basis = basis_cache(e.dim());
      for (std::size_t r = 0; r < basis.size(); ++r) {
        std::vector<std::pair<int, HermitianMatrix>> coeffs;
        for (const auto& t : e.scale_terms()) coeffs.emplace_back(t.var, t.coeff * basis[r]);
        for (const auto& t : e.trace_terms()) {
          const double w = trace_product(basis[r], t.direction);
          if (w != 0.0) coeffs.emplace_back(t.var, w * t.weight);
        }
        StandardRow row;
        row.label = base + "[" + std::to_string(r) + "]";
        emit(row, coeffs);
        if (con.kind == ConstraintKind::lmi) row.blocks.emplace_back(slack_block[c], -0.5 * embed_hermitian(basis[r]));
        row.rhs = -trace_product(basis[r], e.constant());
        sf.rows.push_back(std::move(row));
      }
    }

    const double sign = sense_ == Sense::minimize ? 1.0 : -1.0;
    for (int d : sf.block_dims) sf.objective_blocks.push_back(RMatrix::Zero(d, d));
    sf.objective_free = RVector::Zero(sf.num_free);
    for (const auto& [v, a] : objective_.terms()) {
      if (vars_[v].kind == VarKind::psd) {
        sf.objective_blocks[block_of[v]] += sign * 0.5 * embed_hermitian(a);
      } else {
        const auto basis = basis_cache(vars_[v].dim);
        for (std::size_t s = 0; s < basis.size(); ++s)
          sf.objective_free(free_offset[v] + static_cast<int>(s)) += sign * trace_product(a, basis[s]);
      }
    }
    sf.objective_constant = sign * objective_.constant();
    return sf;
  }

  /// Maps a standard-form solution back onto declared variables and constraints.
  SdpSolution lift(const StandardSolution& raw) const {
    SdpSolution sol;
    sol.status = raw.status;
    const double sign = sense_ == Sense::minimize ? 1.0 : -1.0;
    sol.objective_value = sign * raw.primal_objective;
    sol.dual_value = sign * raw.dual_objective;
    sol.gap = raw.relative_gap;
    sol.absolute_gap = std::abs(raw.primal_objective - raw.dual_objective);
    sol.primal_infeasibility = raw.primal_infeasibility;
    sol.dual_infeasibility = raw.dual_infeasibility;
    sol.iterations = raw.iterations;
    sol.log = raw.log;

    int block = 0, offset = 0;
    for (const auto& v : vars_) {
      if (v.kind == VarKind::psd) {
        sol.values.push_back(extract_hermitian(raw.x.at(block++)));
      } else {
        const auto basis = basis_cache(v.dim);
        CMatrix acc = CMatrix::Zero(v.dim, v.dim);
        for (const auto& b : basis) acc += raw.z(offset++) * b.matrix();
        sol.values.push_back(HermitianMatrix::hermitian_part(acc));
      }
    }
    int row = 0;
    for (const auto& con : constraints_) {
      if (con.kind == ConstraintKind::scalar_equality) {
        sol.constraint_duals.push_back(HermitianMatrix::diagonal({sign * raw.y(row++)}));
        continue;
      }
      const auto basis = basis_cache(con.herm.dim());
      CMatrix acc = CMatrix::Zero(con.herm.dim(), con.herm.dim());
      for (const auto& b : basis) acc += raw.y(row++) * b.matrix();
      // For LMIs the multiplier is PSD for either sense; equalities follow the objective sign.
      sol.constraint_duals.push_back(HermitianMatrix::hermitian_part(con.kind == ConstraintKind::lmi ? acc : CMatrix(sign * acc)));
    }
    return sol;
  }

  /// Standard-form dump for external cross-checking.
  nlohmann::json standard_form_json() const {
    const auto sf = to_standard_form();
    auto mat = [](const RMatrix& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
      }
      return rows;
    };
    nlohmann::json j;
    j["sense"] = "minimize";
    j["original_sense"] = sense_ == Sense::minimize ? "minimize" : "maximize";
    j["block_dims"] = sf.block_dims;
    j["num_free"] = sf.num_free;
    j["objective_constant"] = sf.objective_constant;
    j["objective_blocks"] = nlohmann::json::array();
    for (const auto& c : sf.objective_blocks) j["objective_blocks"].push_back(mat(c));
    j["objective_free"] = std::vector<double>(sf.objective_free.data(), sf.objective_free.data() + sf.objective_free.size());
    j["rows"] = nlohmann::json::array();
    for (const auto& r : sf.rows) {
      nlohmann::json jr;
      jr["label"] = r.label;
      jr["rhs"] = r.rhs;
      jr["blocks"] = nlohmann::json::array();
      for (const auto& [b, m] : r.blocks) jr["blocks"].push_back({{"block", b}, {"coeff", mat(m)}});
      jr["free"] = nlohmann::json::array();
      for (const auto& [k, v] : r.free) jr["free"].push_back({{"index", k}, {"coeff", v}});
      j["rows"].push_back(jr);
    }
    return j;
  }

private:
  struct Constraint {
    ConstraintKind kind;
    std::string name;
    HermExpr herm;
    ScalarExpr scalar;
  };

  int add_var(std::string name, int dim, VarKind kind) {
    if (dim < 1) throw DomainError("SdpProblem: variable dimension must be positive");
    vars_.push_back({std::move(name), dim, kind});
    return static_cast<int>(vars_.size()) - 1;
  }
  void check_var(int v, int dim) const {
    if (v < 0 || v >= static_cast<int>(vars_.size())) throw DomainError("SdpProblem: undeclared variable");
    if (dim >= 0 && vars_[v].dim != dim) throw DomainError("SdpProblem: dimension mismatch for " + vars_[v].name);
  }
  void check(const HermExpr& e) const {
    for (const auto& t : e.scale_terms()) check_var(t.var, e.dim());
    for (const auto& t : e.trace_terms()) {
      check_var(t.var, t.weight.dim());
      if (t.direction.dim() != e.dim()) throw DomainError("SdpProblem: trace term direction has wrong dimension");
    }
  }
  void check(const ScalarExpr& e) const {
    for (const auto& [v, w] : e.terms()) check_var(v, w.dim());
  }
  int count_vars(VarKind k) const {
    return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [k](const Variable& v) { return v.kind == k; }));
  }
  int count_constraints(ConstraintKind k) const {
    return static_cast<int>(
        std::count_if(constraints_.begin(), constraints_.end(), [k](const Constraint& c) { return c.kind == k; }));
  }
  static const std::vector<HermitianMatrix>& basis_cache(int d) {
    static thread_local std::vector<std::vector<HermitianMatrix>> cache;
    if (static_cast<int>(cache.size()) <= d) cache.resize(d + 1);
    if (cache[d].empty()) cache[d] = hermitian_basis(d);
    return cache[d];
  }

  std::vector<Variable> vars_;
  std::vector<Constraint> constraints_;
  Sense sense_ = Sense::minimize;
  ScalarExpr objective_;
};

inline const SdpBackend& default_backend() {
  static const InteriorPointBackend backend;
  return backend;
}

/// Solves with the given backend. A numerical failure is retried once with ten times more
/// centering before being returned; the retry is recorded in the solution log.
inline SdpSolution solve(const SdpProblem& problem, double tol = 1e-8, const SdpBackend& backend = default_backend()) {
  SolverOptions opt;
  opt.tol = tol;
  opt.target = std::min(opt.target, tol * 1e-3);
  const auto sf = problem.to_standard_form();
  auto raw = backend.solve(sf, opt);
  int retries = 0;
  std::vector<std::string> log;
  if (raw.status == SolverStatus::numerical_failure) {
    log = raw.log;
    log.push_back("retrying with centering floor " + std::to_string(opt.centering_floor * 10.0));
    opt.centering_floor *= 10.0;
    raw = backend.solve(sf, opt);
    retries = 1;
  }
  auto sol = problem.lift(raw);
  sol.retries = retries;
  log.insert(log.end(), sol.log.begin(), sol.log.end());
  sol.log = std::move(log);
  return sol;
}

/// Like solve() but raises SolverError unless the status is optimal.
inline SdpSolution solve_or_throw(const SdpProblem& problem, double tol, const std::string& context) {
  auto sol = solve(problem, tol);
  if (!sol.optimal()) {
    std::string diag = std::string("status=") + to_string(sol.status) + " pinf=" + std::to_string(sol.primal_infeasibility) +
                       " dinf=" + std::to_string(sol.dual_infeasibility) + " gap=" + std::to_string(sol.gap);
    for (const auto& l : sol.log) diag += "; " + l;
    throw SolverError(context + ": solver did not reach optimality", diag);
  }
  return sol;
}

} // namespace outcomes::conic
