#pragma once

// Dense primal-dual path-following solver for StandardForm problems.
//
// Infeasible-start, HKM search direction, Mehrotra predictor-corrector. Free variables are
// kept in the Newton system as the saddle point [[M, F], [F^T, 0]] with
// M = [<A_i, X A_k S^{-1}>], solved by LU with iterative refinement (minimum-norm fallback
// when the system goes singular). Linearly dependent rows and free columns are removed before iterating, so programs stated with redundant equalities (e.g. an identity
// component that cancels) or gauge freedoms solve without regularization.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "outcomes/errors.hpp"
#include "outcomes/standard_form.hpp"

namespace outcomes::conic {

namespace ipm_detail {

using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline double inner(const RMatrix& a, const RMatrix& b) { return a.cwiseProduct(b).sum(); }

inline RMatrix sym(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

/// Largest alpha with X + alpha dX PSD, given the Cholesky factor of a positive definite X.
inline double max_step(const Eigen::LLT<RMatrix>& chol, const RMatrix& dx) {
  RMatrix t = chol.matrixL().solve(dx);
  RMatrix m = chol.matrixL().solve(t.transpose());
  const double lmin =
      Eigen::SelfAdjointEigenSolver<RMatrix>(sym(m), Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

struct Incidence {
  int row;
  const RMatrix* coeff;
};

/// Greedy pivoted Cholesky on a Gram matrix; returns indices of a maximal independent subset.
inline std::vector<int> independent_rows(const RMatrix& gram, double threshold) {
  const int n = static_cast<int>(gram.rows());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  RMatrix l = RMatrix::Zero(n, n);
  RVector diag = gram.diagonal();
  std::vector<int> kept;
  std::vector<bool> used(n, false);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    double best_val = threshold;
    for (int i = 0; i < n; ++i)
      if (!used[i] && diag(i) > best_val) {
        best = i;
        best_val = diag(i);
      }
    if (best < 0) break;
    used[best] = true;
    const int c = static_cast<int>(kept.size());
    const double piv = std::sqrt(diag(best));
    for (int i = 0; i < n; ++i) {
      if (used[i] && i != best) continue;
      double v = gram(i, best);
      for (int k = 0; k < c; ++k) v -= l(i, k) * l(best, k);
      l(i, c) = v / piv;
      if (i != best) diag(i) -= l(i, c) * l(i, c);
    }
    kept.push_back(best);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

} // namespace ipm_detail

class InteriorPointBackend final : public SdpBackend {
public:
  std::string name() const override { return "dense-hkm-ipm"; }

  StandardSolution solve(const StandardForm& problem, const SolverOptions& opt) const override {
    using namespace ipm_detail;
    StandardSolution out;
    validate(problem);

    const int nb = static_cast<int>(problem.block_dims.size());
    const int nrows_all = static_cast<int>(problem.rows.size());
    const int nfree_all = problem.num_free;

    // Merge duplicate block entries and normalize each row.
    std::vector<std::vector<std::pair<int, RMatrix>>> row_blocks(nrows_all);
    RMatrix free_all = RMatrix::Zero(nrows_all, nfree_all);
    RVector b_all(nrows_all);
    RVector row_norm(nrows_all);
    for (int i = 0; i < nrows_all; ++i) {
      const auto& r = problem.rows[i];
      for (const auto& [j, m] : r.blocks) {
        auto it = std::find_if(row_blocks[i].begin(), row_blocks[i].end(),
                               [j = j](const auto& e) { return e.first == j; });
        if (it == row_blocks[i].end())
          row_blocks[i].emplace_back(j, sym(m));
        else
          it->second += sym(m);
      }
      for (const auto& [k, v] : r.free) free_all(i, k) += v;
      double nrm2 = free_all.row(i).squaredNorm();
      for (const auto& e : row_blocks[i]) nrm2 += e.second.squaredNorm();
      row_norm(i) = std::sqrt(nrm2);
      b_all(i) = r.rhs;
    }

    std::vector<int> candidate_rows;
    for (int i = 0; i < nrows_all; ++i) {
      if (row_norm(i) > 0.0) {
        candidate_rows.push_back(i);
        continue;
      }
      if (std::abs(b_all(i)) > opt.tol) {
        out.status = SolverStatus::infeasible;
        out.log.push_back("presolve: empty row with nonzero right-hand side (" + problem.rows[i].label + ")");
        return finish_trivial(problem, out);
      }
    }
    for (int i : candidate_rows) {
      for (auto& e : row_blocks[i]) e.second /= row_norm(i);
      free_all.row(i) /= row_norm(i);
      b_all(i) /= row_norm(i);
    }

    // Gram matrix of normalized candidate rows.
    const int nc = static_cast<int>(candidate_rows.size());
    RMatrix gram = RMatrix::Zero(nc, nc);
    {
      std::vector<std::vector<std::pair<int, const RMatrix*>>> by_block(nb);
      for (int li = 0; li < nc; ++li)
        for (const auto& e : row_blocks[candidate_rows[li]]) by_block[e.first].emplace_back(li, &e.second);
      for (const auto& lst : by_block)
        for (const auto& [i, ai] : lst)
          for (const auto& [k, ak] : lst) gram(i, k) += inner(*ai, *ak);
      RMatrix fc(nc, nfree_all);
      for (int li = 0; li < nc; ++li) fc.row(li) = free_all.row(candidate_rows[li]);
      gram += fc * fc.transpose();
    }
    const std::vector<int> kept_local = independent_rows(gram, 1e-12);
    if (static_cast<int>(kept_local.size()) < nc) {
      // Dependent rows must have consistent right-hand sides.
      std::vector<bool> is_kept(nc, false);
      for (int k : kept_local) is_kept[k] = true;
      const int nk = static_cast<int>(kept_local.size());
      RMatrix gkk(nk, nk);
      RVector bk(nk);
      for (int a = 0; a < nk; ++a) {
        bk(a) = b_all(candidate_rows[kept_local[a]]);
        for (int c = 0; c < nk; ++c) gkk(a, c) = gram(kept_local[a], kept_local[c]);
      }
      Eigen::LDLT<RMatrix> gfac(gkk);
      for (int r = 0; r < nc; ++r) {
        if (is_kept[r]) continue;
        RVector gkr(nk);
        for (int a = 0; a < nk; ++a) gkr(a) = gram(kept_local[a], r);
        const RVector beta = nk > 0 ? RVector(gfac.solve(gkr)) : RVector();
        const double implied = nk > 0 ? beta.dot(bk) : 0.0;
        if (std::abs(implied - b_all(candidate_rows[r])) > 1e-8 * (1.0 + std::abs(b_all(candidate_rows[r])))) {
          out.status = SolverStatus::infeasible;
          out.log.push_back("presolve: inconsistent dependent row (" + problem.rows[candidate_rows[r]].label + ")");
          return finish_trivial(problem, out);
        }
      }
    }
    std::vector<int> rows;
    for (int k : kept_local) rows.push_back(candidate_rows[k]);
    const int m = static_cast<int>(rows.size());
    out.removed_rows = nrows_all - m;

    // Free columns: keep a maximal independent subset, the rest are gauge directions fixed at 0.
    std::vector<int> free_cols;
    {
      RMatrix fk(m, nfree_all);
      for (int a = 0; a < m; ++a) fk.row(a) = free_all.row(rows[a]);
      if (nfree_all > 0) {
        int rank = 0;
        if (m > 0) {
          Eigen::ColPivHouseholderQR<RMatrix> qr(fk);
          qr.setThreshold(1e-10);
          rank = static_cast<int>(qr.rank());
          for (int c = 0; c < rank; ++c) free_cols.push_back(qr.colsPermutation().indices()(c));
        }
        std::sort(free_cols.begin(), free_cols.end());
        if (rank < nfree_all) {
          RMatrix keep(m, rank);
          RVector fkeep(rank);
          for (int c = 0; c < rank; ++c) {
            keep.col(c) = fk.col(free_cols[c]);
            fkeep(c) = problem.objective_free(free_cols[c]);
          }
          std::vector<bool> kept(nfree_all, false);
          for (int c : free_cols) kept[c] = true;
          for (int c = 0; c < nfree_all; ++c) {
            if (kept[c]) continue;
            const double implied = rank > 0 ? keep.colPivHouseholderQr().solve(RVector(fk.col(c))).dot(fkeep) : 0.0;
            if (std::abs(implied - problem.objective_free(c)) > 1e-8 * (1.0 + std::abs(problem.objective_free(c)))) {
              out.status = SolverStatus::unbounded;
              out.log.push_back("presolve: objective not constant along a free null direction");
              return finish_trivial(problem, out);
            }
          }
        }
      }
    }
    const int p = static_cast<int>(free_cols.size());
    out.fixed_free = nfree_all - p;

    // Working data in the reduced, normalized space.
    std::vector<std::vector<Incidence>> inc(nb);
    for (int a = 0; a < m; ++a)
      for (const auto& e : row_blocks[rows[a]]) inc[e.first].push_back({a, &e.second});
    RMatrix F(m, p);
    RVector b(m), f(p);
    for (int a = 0; a < m; ++a) {
      b(a) = b_all(rows[a]);
      for (int c = 0; c < p; ++c) F(a, c) = free_all(rows[a], free_cols[c]);
    }
    for (int c = 0; c < p; ++c) f(c) = problem.objective_free(free_cols[c]);
    std::vector<RMatrix> C(nb);
    for (int j = 0; j < nb; ++j) C[j] = sym(problem.objective_blocks[j]);

    auto A_of = [&](const std::vector<RMatrix>& X) {
      RVector v = RVector::Zero(m);
      for (int j = 0; j < nb; ++j)
        for (const auto& e : inc[j]) v(e.row) += inner(*e.coeff, X[j]);
      return v;
    };
    auto AT_of = [&](const RVector& y) {
      std::vector<RMatrix> out_blocks(nb);
      for (int j = 0; j < nb; ++j) {
        out_blocks[j] = RMatrix::Zero(problem.block_dims[j], problem.block_dims[j]);
        for (const auto& e : inc[j]) out_blocks[j] += y(e.row) * *e.coeff;
      }
      return out_blocks;
    };

    double n_total = 0.0;
    double c_norm2 = f.squaredNorm();
    for (int j = 0; j < nb; ++j) {
      n_total += problem.block_dims[j];
      c_norm2 += C[j].squaredNorm();
    }
    const double c_norm = std::sqrt(c_norm2);
    const double b_norm = b.norm();

    // Starting point scaled to the data.
    std::vector<RMatrix> X(nb), S(nb);
    for (int j = 0; j < nb; ++j) {
      const int nj = problem.block_dims[j];
      double xi = std::max(10.0, std::sqrt(double(nj)));
      double eta = std::max(10.0, std::sqrt(double(nj)));
      for (const auto& e : inc[j]) {
        const double an = e.coeff->norm();
        xi = std::max(xi, nj * (1.0 + std::abs(b(e.row))) / (1.0 + an));
        eta = std::max(eta, an);
      }
      eta = std::max(eta, C[j].norm());
      X[j] = xi * RMatrix::Identity(nj, nj);
      S[j] = eta * RMatrix::Identity(nj, nj);
    }
    RVector y = RVector::Zero(m);
    RVector z = RVector::Zero(p);

    struct Snapshot {
      std::vector<RMatrix> X, S;
      RVector y, z;
      double merit = std::numeric_limits<double>::infinity();
      double pinf = 0, dinf = 0, gap = 0, pobj = 0, dobj = 0;
    } best;

    SolverStatus detected = SolverStatus::numerical_failure;
    bool detected_certificate = false;
    int it = 0;
    int stagnant = 0;
    int cod_fallbacks = 0;
    for (; it < opt.max_iterations; ++it) {
      const RVector rp = b - A_of(X) - F * z;
      const auto aty = AT_of(y);
      std::vector<RMatrix> Rd(nb);
      double rd2 = 0.0;
      double xs = 0.0;
      double pobj = f.dot(z);
      for (int j = 0; j < nb; ++j) {
        Rd[j] = C[j] - aty[j] - S[j];
        rd2 += Rd[j].squaredNorm();
        xs += inner(X[j], S[j]);
        pobj += inner(C[j], X[j]);
      }
      const RVector rf = f - F.transpose() * y;
      rd2 += rf.squaredNorm();
      const double dobj = b.dot(y);
      const double pinf = rp.norm() / (1.0 + b_norm);
      const double dinf = std::sqrt(rd2) / (1.0 + c_norm);
      const double gap = std::max(std::abs(pobj - dobj), std::abs(xs)) / (1.0 + std::abs(pobj) + std::abs(dobj));
      const double merit = std::max({pinf, dinf, gap});
      if (opt.verbose)
        std::fprintf(stderr, "%3d pobj=% .12e dobj=% .12e pinf=%.2e dinf=%.2e gap=%.2e\n", it, pobj, dobj, pinf, dinf, gap);
      if (merit < 0.9 * best.merit) stagnant = 0;
      else if (++stagnant >= 6) break;
      if (merit < best.merit) best = Snapshot{X, S, y, z, merit, pinf, dinf, gap, pobj, dobj};
      if (merit <= opt.target) break;

      // Infeasibility certificates from diverging iterates.
      if (dobj > 1e8) {
        double ray = 0.0;
        for (int j = 0; j < nb; ++j) ray += (aty[j] + S[j]).squaredNorm();
        ray = std::sqrt(ray + (F.transpose() * y).squaredNorm()) / dobj;
        if (ray < 1e-6) {
          detected = SolverStatus::infeasible;
          detected_certificate = true;
          break;
        }
      }
      if (pobj < -1e8) {
        const double ray = (A_of(X) + F * z).norm() / -pobj;
        if (ray < 1e-6) {
          detected = SolverStatus::unbounded;
          detected_certificate = true;
          break;
        }
      }

      const double mu = xs / n_total;
      std::vector<Eigen::LLT<RMatrix>> xchol(nb), schol(nb);
      std::vector<RMatrix> Sinv(nb);
      bool ok = true;
      for (int j = 0; j < nb && ok; ++j) {
        xchol[j].compute(X[j]);
        schol[j].compute(S[j]);
        if (xchol[j].info() != Eigen::Success || schol[j].info() != Eigen::Success) {
          ok = false;
          break;
        }
        Sinv[j] = schol[j].solve(RMatrix::Identity(S[j].rows(), S[j].cols()));
      }
      if (!ok) {
        out.log.push_back("iteration " + std::to_string(it) + ": lost positive definiteness");
        break;
      }

      // Schur complement.
      RMatrix M = RMatrix::Zero(m, m);
      for (int j = 0; j < nb; ++j) {
        for (const auto& ek : inc[j]) {
          const RMatrix P = X[j] * *ek.coeff * Sinv[j];
          for (const auto& ei : inc[j]) M(ei.row, ek.row) += inner(*ei.coeff, P);
        }
      }
      M = sym(M);
      // Saddle system [[M, F], [F^T, 0]] [dy; dz] = [h; r_f] with iterative refinement.
      RMatrix K = RMatrix::Zero(m + p, m + p);
      K.topLeftCorner(m, m) = M;
      K.topRightCorner(m, p) = F;
      K.bottomLeftCorner(p, m) = F.transpose();
      // LU with refinement; if the refined residual shows lost accuracy (the Schur complement
      // goes singular on a degenerate optimal face), fall back to a minimum-norm solve of the
      // Jacobi-scaled system so the step stays bounded.
      Eigen::PartialPivLU<RMatrix> kfac(K);
      std::optional<Eigen::CompleteOrthogonalDecomposition<RMatrix>> kcod;
      RVector scale;
      auto refined = [&](const RVector& rhs, auto&& raw) {
        RVector sol = raw(rhs);
        for (int pass = 0; pass < 2; ++pass) sol += raw(RVector(rhs - K * sol));
        return sol;
      };
      auto saddle_solve = [&](const RVector& rhs) {
        RVector sol = refined(rhs, [&](const RVector& r) { return RVector(kfac.solve(r)); });
        if ((K * sol - rhs).norm() <= 1e-6 * (1.0 + rhs.norm())) return sol;
        if (!kcod) {
          scale = RVector::Ones(m + p);
          for (int i = 0; i < m + p; ++i) {
            const double a = K.row(i).cwiseAbs().maxCoeff();
            if (a > 0) scale(i) = 1.0 / std::sqrt(a);
          }
          kcod.emplace();
          kcod->setThreshold(1e-13);
          kcod->compute(scale.asDiagonal() * K * scale.asDiagonal());
          ++cod_fallbacks;
        }
        return refined(rhs, [&](const RVector& r) { return RVector(scale.cwiseProduct(kcod->solve(RVector(scale.cwiseProduct(r))))); });
      };

      struct Direction {
        std::vector<RMatrix> dX, dS;
        RVector dy, dz;
      };
      auto direction = [&](double sigma_mu, const std::vector<RMatrix>* corr) {
        std::vector<RMatrix> K(nb);
        for (int j = 0; j < nb; ++j) {
          K[j] = sigma_mu * Sinv[j] - X[j] - X[j] * Rd[j] * Sinv[j];
          if (corr) K[j] -= (*corr)[j];
        }
        const RVector h = rp - A_of(K);
        Direction d;
        RVector rhs(m + p);
        rhs.head(m) = h;
        rhs.tail(p) = rf;
        const RVector sol = saddle_solve(rhs);
        d.dy = sol.head(m);
        d.dz = sol.tail(p);
        const auto atdy = AT_of(d.dy);
        d.dX.resize(nb);
        d.dS.resize(nb);
        for (int j = 0; j < nb; ++j) {
          d.dS[j] = Rd[j] - atdy[j];
          d.dX[j] = sym(K[j] + X[j] * atdy[j] * Sinv[j]);
        }
        return d;
      };
      auto steps = [&](const Direction& d, double fraction) {
        double ap = std::numeric_limits<double>::infinity();
        double ad = std::numeric_limits<double>::infinity();
        for (int j = 0; j < nb; ++j) {
          ap = std::min(ap, max_step(xchol[j], d.dX[j]));
          ad = std::min(ad, max_step(schol[j], d.dS[j]));
        }
        return std::pair{std::min(1.0, fraction * ap), std::min(1.0, fraction * ad)};
      };

      const Direction pred = direction(0.0, nullptr);
      const auto [ap_aff, ad_aff] = steps(pred, 1.0);
      double xs_aff = 0.0;
      for (int j = 0; j < nb; ++j) xs_aff += inner(X[j] + ap_aff * pred.dX[j], S[j] + ad_aff * pred.dS[j]);
      const double mu_aff = xs_aff / n_total;
      double sigma = mu > 0 ? std::pow(std::max(0.0, mu_aff / mu), 3) : 0.0;
      sigma = std::clamp(sigma, opt.centering_floor, 1.0);

      std::vector<RMatrix> corr(nb);
      for (int j = 0; j < nb; ++j) corr[j] = pred.dX[j] * pred.dS[j] * Sinv[j];
      const Direction dir = direction(sigma * mu, &corr);
      Direction dir_used = dir;
      auto [ap, ad] = steps(dir, opt.step_fraction);
      // A collapsed corrected step means the iterate drifted off the central path: take a
      // strongly centering step instead.
      if (std::min(ap, ad) < 0.1) {
        const Direction centre = direction(std::max(sigma, 0.5) * mu, nullptr);
        const auto [cp, cd] = steps(centre, opt.step_fraction);
        if (std::min(cp, cd) > std::min(ap, ad)) {
          dir_used = centre;
          ap = cp;
          ad = cd;
        }
      }
      if (opt.verbose) std::fprintf(stderr, "    sigma=%.2e ap=%.3f ad=%.3f%s\n", sigma, ap, ad, kcod ? " (minimum-norm)" : "");

      for (int j = 0; j < nb; ++j) {
        X[j] = sym(X[j] + ap * dir_used.dX[j]);
        S[j] = sym(S[j] + ad * dir_used.dS[j]);
      }
      z += ap * dir_used.dz;
      y += ad * dir_used.dy;

      if (ap < 1e-10 && ad < 1e-10) {
        out.log.push_back("iteration " + std::to_string(it) + ": step lengths collapsed");
        break;
      }
    }
    out.iterations = it;
    if (cod_fallbacks > 0) out.log.push_back("minimum-norm Newton steps on " + std::to_string(cod_fallbacks) + " iterations");

    // Map the best iterate back to the caller's indexing and scaling.
    out.x = best.X;
    out.s = best.S;
    out.y = RVector::Zero(nrows_all);
    for (int a = 0; a < m; ++a) out.y(rows[a]) = best.y(a) / row_norm(rows[a]);
    out.z = RVector::Zero(nfree_all);
    for (int c = 0; c < p; ++c) out.z(free_cols[c]) = best.z(c);
    out.primal_objective = best.pobj + problem.objective_constant;
    out.dual_objective = best.dobj + problem.objective_constant;
    out.primal_infeasibility = best.pinf;
    out.dual_infeasibility = best.dinf;
    out.relative_gap = best.gap;

    if (detected_certificate) {
      out.status = detected;
      out.log.push_back(std::string("certificate of ") + to_string(detected) + " detected");
    } else if (best.merit <= opt.tol) {
      out.status = SolverStatus::optimal;
    } else {
      out.status = SolverStatus::numerical_failure;
      std::ostringstream os;
      os << "stopped after " << it << " iterations: pinf=" << best.pinf << " dinf=" << best.dinf
         << " gap=" << best.gap;
      out.log.push_back(os.str());
    }
    return out;
  }

private:
  static void validate(const StandardForm& p) {
    const int nb = static_cast<int>(p.block_dims.size());
    if (static_cast<int>(p.objective_blocks.size()) != nb)
      throw DomainError("StandardForm: objective block count mismatch");
    if (p.objective_free.size() != p.num_free) throw DomainError("StandardForm: objective free length mismatch");
    for (int j = 0; j < nb; ++j)
      if (p.objective_blocks[j].rows() != p.block_dims[j] || p.objective_blocks[j].cols() != p.block_dims[j])
        throw DomainError("StandardForm: objective block dimension mismatch");
    for (const auto& r : p.rows) {
      for (const auto& [j, m] : r.blocks)
        if (j < 0 || j >= nb || m.rows() != p.block_dims[j] || m.cols() != p.block_dims[j])
          throw DomainError("StandardForm: row references an invalid block (" + r.label + ")");
      for (const auto& [k, v] : r.free)
        if (k < 0 || k >= p.num_free) throw DomainError("StandardForm: row references an invalid free variable");
    }
  }

  static StandardSolution finish_trivial(const StandardForm& p, StandardSolution& out) {
    for (int d : p.block_dims) {
      out.x.push_back(Eigen::MatrixXd::Zero(d, d));
      out.s.push_back(Eigen::MatrixXd::Zero(d, d));
    }
    out.z = Eigen::VectorXd::Zero(p.num_free);
    out.y = Eigen::VectorXd::Zero(static_cast<int>(p.rows.size()));
    out.primal_objective = out.dual_objective = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
};

} // namespace outcomes::conic
