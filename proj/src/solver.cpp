#include "masr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace masr {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using SparseRow = std::vector<std::pair<int, double>>;

struct Row {
  SparseRow a;
  double b = 0.0;
  double eval(const VectorXd& x) const {
    double v = b;
    for (const auto& [i, c] : a) v += c * x(i);
    return v;
  }
};

Row to_row(const LinearForm& f) {
  Row r;
  r.b = f.constant;
  for (const auto& [i, c] : f.terms) {
    auto it = std::find_if(r.a.begin(), r.a.end(), [i](const auto& e) { return e.first == i; });
    if (it == r.a.end())
      r.a.emplace_back(i, c);
    else
      it->second += c;
  }
  return r;
}

// Adds the phase-one slack with unit weight.
Row relaxed(Row r, int s_index) {
  r.a.emplace_back(s_index, 1.0);
  return r;
}

void add_outer(MatrixXd& H, const SparseRow& a, double w) {
  for (const auto& [i, ci] : a)
    for (const auto& [j, cj] : a) H(i, j) += w * ci * cj;
}

void add_scaled(VectorXd& g, const SparseRow& a, double w) {
  for (const auto& [i, c] : a) g(i) += w * c;
}

enum class TermKind { diagonal, low_rank, dense };

struct PreparedLmi {
  Eigen::Index dim = 0;
  MatrixXd constant;
  std::vector<int> var;
  std::vector<MatrixXd> coeff;
  std::vector<TermKind> kind;

  std::vector<int> diag_terms;
  MatrixXd diag_vectors;  // dim x (#diag)

  std::vector<int> lr_terms;
  std::vector<Eigen::Index> lr_offset, lr_rank;
  MatrixXd V;  // dim x R
  VectorXd d;  // R

  std::vector<int> dense_terms;
};

bool is_diagonal(const MatrixXd& F) {
  for (Eigen::Index j = 0; j < F.cols(); ++j)
    for (Eigen::Index i = 0; i < F.rows(); ++i)
      if (i != j && F(i, j) != 0.0) return false;
  return true;
}

// Randomized range finder; succeeds only when F is reproduced to round-off.
bool low_rank_factor(const MatrixXd& F, MatrixXd& V, VectorXd& d) {
  const Eigen::Index n = F.rows();
  const Eigen::Index k = std::min<Eigen::Index>(n, 16);
  if (2 * k > n) return false;
  std::mt19937_64 gen(0x5eed);
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd omega(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = nd(gen);
  const MatrixXd Y = F * omega;
  Eigen::HouseholderQR<MatrixXd> qr(Y);
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, k);
  const MatrixXd B = Q.transpose() * F * Q;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (B + B.transpose()));
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(es.eigenvalues()(i)) > 1e-13 * top) keep.push_back(i);
  if (static_cast<Eigen::Index>(keep.size()) > k - 2) return false;
  V.resize(n, static_cast<Eigen::Index>(keep.size()));
  d.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    V.col(static_cast<Eigen::Index>(c)) = Q * es.eigenvectors().col(keep[c]);
    d(static_cast<Eigen::Index>(c)) = es.eigenvalues()(keep[c]);
  }
  const double err = (F - V * d.asDiagonal() * V.transpose()).cwiseAbs().maxCoeff();
  return err <= 1e-11 * std::max(F.cwiseAbs().maxCoeff(), 1e-300);
}

PreparedLmi prepare(const LmiBlock& b, int s_index, bool structured) {
  PreparedLmi p;
  p.dim = b.dim();
  p.constant = b.constant;
  for (const auto& [i, c] : b.terms) {
    p.var.push_back(i);
    p.coeff.push_back(c);
  }
  p.var.push_back(s_index);
  p.coeff.push_back(MatrixXd::Identity(p.dim, p.dim));

  std::vector<MatrixXd> factors;
  std::vector<VectorXd> eigs;
  for (std::size_t t = 0; t < p.var.size(); ++t) {
    MatrixXd V;
    VectorXd d;
    if (structured && is_diagonal(p.coeff[t])) {
      p.kind.push_back(TermKind::diagonal);
      p.diag_terms.push_back(static_cast<int>(t));
    } else if (structured && low_rank_factor(p.coeff[t], V, d)) {
      p.kind.push_back(TermKind::low_rank);
      p.lr_terms.push_back(static_cast<int>(t));
      // keep value and derivatives on the same (factored) coefficient
      p.coeff[t] = V * d.asDiagonal() * V.transpose();
      factors.push_back(std::move(V));
      eigs.push_back(std::move(d));
    } else {
      p.kind.push_back(TermKind::dense);
      p.dense_terms.push_back(static_cast<int>(t));
    }
  }
  p.diag_vectors.resize(p.dim, static_cast<Eigen::Index>(p.diag_terms.size()));
  for (std::size_t a = 0; a < p.diag_terms.size(); ++a)
    p.diag_vectors.col(static_cast<Eigen::Index>(a)) =
        p.coeff[static_cast<std::size_t>(p.diag_terms[a])].diagonal();
  Eigen::Index R = 0;
  for (const auto& f : factors) {
    p.lr_offset.push_back(R);
    p.lr_rank.push_back(f.cols());
    R += f.cols();
  }
  p.V.resize(p.dim, R);
  p.d.resize(R);
  for (std::size_t t = 0; t < factors.size(); ++t) {
    p.V.middleCols(p.lr_offset[t], p.lr_rank[t]) = factors[t];
    p.d.segment(p.lr_offset[t], p.lr_rank[t]) = eigs[t];
  }
  return p;
}

struct PreparedSoc {
  MatrixXd A;  // rows x ne
  VectorXd b;
  VectorXd c;  // ne
  double d = 0.0;
};

struct PreparedLogConstraint {
  std::vector<double> weight;
  std::vector<Row> args;
  Row linear;
};

class Model {
 public:
  Model(const ConicProblem& p, const SolverOptions& o) : n_(p.size()), bound_(o.variable_bound) {
    const int s = n_;
    objective_ = to_row(p.objective);
    for (const auto& t : p.objective_logs) {
      obj_weight_.push_back(t.weight);
      obj_args_.push_back(to_row(t.argument));
      rows_.push_back(relaxed(to_row(t.argument), s));
    }
    for (const auto& f : p.inequalities) rows_.push_back(relaxed(to_row(f), s));
    for (int i = 0; i < n_; ++i) {
      const double lo = p.lower[static_cast<std::size_t>(i)];
      const double hi = p.upper[static_cast<std::size_t>(i)];
      if (std::isfinite(lo)) rows_.push_back(Row{{{i, 1.0}, {s, 1.0}}, -lo});
      if (std::isfinite(hi)) rows_.push_back(Row{{{i, -1.0}, {s, 1.0}}, hi});
    }
    for (const auto& sc : p.socs) {
      PreparedSoc q;
      q.A = MatrixXd::Zero(static_cast<Eigen::Index>(sc.rows.size()), n_ + 1);
      q.b.resize(static_cast<Eigen::Index>(sc.rows.size()));
      for (std::size_t r = 0; r < sc.rows.size(); ++r) {
        q.b(static_cast<Eigen::Index>(r)) = sc.rows[r].constant;
        for (const auto& [i, a] : sc.rows[r].terms) q.A(static_cast<Eigen::Index>(r), i) += a;
      }
      q.c = VectorXd::Zero(n_ + 1);
      for (const auto& [i, a] : sc.bound.terms) q.c(i) += a;
      q.c(s) = 1.0;
      q.d = sc.bound.constant;
      socs_.push_back(std::move(q));
    }
    for (const auto& lc : p.log_constraints) {
      PreparedLogConstraint q;
      for (const auto& t : lc.logs) {
        q.weight.push_back(t.weight);
        q.args.push_back(relaxed(to_row(t.argument), s));
        rows_.push_back(relaxed(to_row(t.argument), s));
      }
      q.linear = relaxed(to_row(lc.linear), s);
      logc_.push_back(std::move(q));
    }
    for (const auto& b : p.lmis) lmis_.push_back(prepare(b, s, o.exploit_structure));

    degree_ = static_cast<double>(rows_.size()) + 2.0 * n_ + 2.0 * static_cast<double>(socs_.size()) +
              static_cast<double>(logc_.size());
    for (const auto& b : lmis_) degree_ += static_cast<double>(b.dim);
  }

  int n() const { return n_; }
  double degree() const { return degree_; }

  // Barrier-augmented merit. Phase one minimises the slack x(n); phase two
  // maximises the problem objective.
  bool eval(const VectorXd& x, bool phase1, double t, double* val, VectorXd* g,
            MatrixXd* H) const {
    const int ne = n_ + 1;
    const bool derivs = g != nullptr;
    if (derivs) {
      g->setZero(ne);
      H->setZero(ne, ne);
    }
    double f = 0.0;
    if (phase1) {
      f += t * x(n_);
      if (derivs) (*g)(n_) += t;
    } else {
      f -= t * objective_.eval(x);
      if (derivs) add_scaled(*g, objective_.a, -t);
      for (std::size_t k = 0; k < obj_args_.size(); ++k) {
        const double l = obj_args_[k].eval(x);
        if (!(l > 0.0)) return false;
        const double w = obj_weight_[k];
        f -= t * w * std::log(l);
        if (derivs) {
          add_scaled(*g, obj_args_[k].a, -t * w / l);
          add_outer(*H, obj_args_[k].a, t * w / (l * l));
        }
      }
    }
    for (const auto& r : rows_) {
      const double v = r.eval(x);
      if (!(v > 0.0)) return false;
      f -= std::log(v);
      if (derivs) {
        add_scaled(*g, r.a, -1.0 / v);
        add_outer(*H, r.a, 1.0 / (v * v));
      }
    }
    for (int i = 0; i < n_; ++i) {
      const double up = bound_ - x(i);
      const double lo = bound_ + x(i);
      if (!(up > 0.0 && lo > 0.0)) return false;
      f -= std::log(up) + std::log(lo);
      if (derivs) {
        (*g)(i) += 1.0 / up - 1.0 / lo;
        (*H)(i, i) += 1.0 / (up * up) + 1.0 / (lo * lo);
      }
    }
    for (const auto& q : socs_) {
      const double u = q.c.dot(x) + q.d;
      const VectorXd v = q.A * x + q.b;
      const double fs = u * u - v.squaredNorm();
      if (!(u > 0.0 && fs > 0.0)) return false;
      f -= std::log(fs);
      if (derivs) {
        const VectorXd df = 2.0 * u * q.c - 2.0 * q.A.transpose() * v;
        *g -= df / fs;
        *H += df * df.transpose() / (fs * fs);
        *H -= (2.0 * q.c * q.c.transpose() - 2.0 * q.A.transpose() * q.A) / fs;
      }
    }
    for (const auto& q : logc_) {
      double u = q.linear.eval(x);
      std::vector<double> ls(q.args.size());
      for (std::size_t k = 0; k < q.args.size(); ++k) {
        ls[k] = q.args[k].eval(x);
        if (!(ls[k] > 0.0)) return false;
        u += q.weight[k] * std::log(ls[k]);
      }
      if (!(u > 0.0)) return false;
      f -= std::log(u);
      if (derivs) {
        VectorXd du = VectorXd::Zero(ne);
        add_scaled(du, q.linear.a, 1.0);
        for (std::size_t k = 0; k < q.args.size(); ++k) {
          add_scaled(du, q.args[k].a, q.weight[k] / ls[k]);
          add_outer(*H, q.args[k].a, q.weight[k] / (ls[k] * ls[k] * u));
        }
        *g -= du / u;
        *H += du * du.transpose() / (u * u);
      }
    }
    for (const auto& b : lmis_)
      if (!eval_lmi(b, x, f, g, H)) return false;
    if (!std::isfinite(f)) return false;
    *val = f;
    return true;
  }

 private:
  static bool eval_lmi(const PreparedLmi& b, const VectorXd& x, double& f, VectorXd* g,
                       MatrixXd* H) {
    MatrixXd F = b.constant;
    for (std::size_t t = 0; t < b.var.size(); ++t) {
      const double z = x(b.var[t]);
      if (z != 0.0) F.noalias() += z * b.coeff[t];
    }
    Eigen::LLT<MatrixXd> llt(F);
    if (llt.info() != Eigen::Success) return false;
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < b.dim; ++i) {
      const double l = llt.matrixLLT()(i, i);
      if (!(l > 0.0)) return false;
      logdet += std::log(l);
    }
    f -= 2.0 * logdet;
    if (!g) return true;

    const MatrixXd S = llt.solve(MatrixXd::Identity(b.dim, b.dim));
    const auto nD = static_cast<Eigen::Index>(b.diag_terms.size());
    const auto nL = b.lr_terms.size();
    if (nD > 0) {
      const VectorXd gd = b.diag_vectors.transpose() * S.diagonal();
      const MatrixXd hdd = b.diag_vectors.transpose() * S.cwiseAbs2() * b.diag_vectors;
      for (Eigen::Index a = 0; a < nD; ++a) {
        const int va = b.var[static_cast<std::size_t>(b.diag_terms[static_cast<std::size_t>(a)])];
        (*g)(va) -= gd(a);
        for (Eigen::Index c = 0; c < nD; ++c)
          (*H)(va, b.var[static_cast<std::size_t>(b.diag_terms[static_cast<std::size_t>(c)])]) +=
              hdd(a, c);
      }
    }
    if (nL > 0) {
      const MatrixXd SV = S * b.V;
      const MatrixXd C = b.V.transpose() * SV;
      const MatrixXd P = (b.d * b.d.transpose()).cwiseProduct(C.cwiseAbs2());
      for (std::size_t t = 0; t < nL; ++t) {
        const int vt = b.var[static_cast<std::size_t>(b.lr_terms[t])];
        const Eigen::Index ot = b.lr_offset[t], rt = b.lr_rank[t];
        (*g)(vt) -= b.d.segment(ot, rt).dot(C.diagonal().segment(ot, rt));
        for (std::size_t u = 0; u < nL; ++u) {
          const int vu = b.var[static_cast<std::size_t>(b.lr_terms[u])];
          (*H)(vt, vu) += P.block(ot, b.lr_offset[u], rt, b.lr_rank[u]).sum();
        }
      }
      if (nD > 0) {
        const MatrixXd W = b.diag_vectors.transpose() * SV.cwiseAbs2() * b.d.asDiagonal();
        for (Eigen::Index a = 0; a < nD; ++a) {
          const int va = b.var[static_cast<std::size_t>(b.diag_terms[static_cast<std::size_t>(a)])];
          for (std::size_t t = 0; t < nL; ++t) {
            const int vt = b.var[static_cast<std::size_t>(b.lr_terms[t])];
            const double h = W.block(a, b.lr_offset[t], 1, b.lr_rank[t]).sum();
            (*H)(va, vt) += h;
            (*H)(vt, va) += h;
          }
        }
      }
    }
    for (const int t : b.dense_terms) {
      const auto ts = static_cast<std::size_t>(t);
      const MatrixXd T = S * b.coeff[ts] * S;
      const int vt = b.var[ts];
      (*g)(vt) -= S.cwiseProduct(b.coeff[ts]).sum();
      for (std::size_t u = 0; u < b.var.size(); ++u) {
        const double h = T.cwiseProduct(b.coeff[u]).sum();
        const int vu = b.var[u];
        if (u == ts) {
          (*H)(vt, vt) += h;
        } else if (b.kind[u] == TermKind::dense) {
          (*H)(vt, vu) += h;
        } else {
          (*H)(vt, vu) += h;
          (*H)(vu, vt) += h;
        }
      }
    }
    return true;
  }

  int n_;
  double bound_;
  double degree_ = 0.0;
  Row objective_;
  std::vector<double> obj_weight_;
  std::vector<Row> obj_args_;
  std::vector<Row> rows_;
  std::vector<PreparedSoc> socs_;
  std::vector<PreparedLogConstraint> logc_;
  std::vector<PreparedLmi> lmis_;
};

struct PathOutcome {
  enum Kind { converged, early_stop, stalled, budget } kind = converged;
  double gap = 0.0;
};

bool newton_direction(const MatrixXd& N, const VectorXd& g, const MatrixXd& H, VectorXd& dx,
                      double& lambda2) {
  const VectorXd gy = N.transpose() * g;
  MatrixXd Hy = N.transpose() * H * N;
  Hy = 0.5 * (Hy + Hy.transpose());
  double reg = 0.0;
  const double scale = std::max(Hy.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (int attempt = 0; attempt < 12; ++attempt) {
    MatrixXd M = Hy;
    if (reg > 0.0) M.diagonal().array() += reg;
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) {
      const VectorXd dy = -llt.solve(gy);
      if (dy.allFinite()) {
        dx = N * dy;
        lambda2 = -gy.dot(dy);
        return true;
      }
    }
    reg = reg == 0.0 ? 1e-14 * scale : reg * 100.0;
  }
  return false;
}

PathOutcome follow_path(const Model& model, VectorXd& x, const MatrixXd& N, bool phase1, double t,
                        const SolverOptions& opts, double gap_target, int& steps) {
  const int ne = model.n() + 1;
  VectorXd g(ne), dx(ne);
  MatrixXd H(ne, ne);
  double f = 0.0;
  for (;;) {
    for (;;) {
      if (!model.eval(x, phase1, t, &f, &g, &H)) return {PathOutcome::stalled, opts.barrier_growth * model.degree() / t};
      double lambda2 = 0.0;
      if (!newton_direction(N, g, H, dx, lambda2)) return {PathOutcome::stalled, opts.barrier_growth * model.degree() / t};
      // decrements below the merit's round-off cannot be resolved by the line search
      if (lambda2 / 2.0 <= opts.newton_tolerance || lambda2 <= 1e-13 * std::abs(f)) break;
      if (++steps > opts.max_newton_steps) return {PathOutcome::budget, opts.barrier_growth * model.degree() / t};
      double alpha = 1.0;
      double fn = 0.0;
      VectorXd xn = x + dx;
      while (!model.eval(xn, phase1, t, &fn, nullptr, nullptr)) {
        alpha *= 0.5;
        if (alpha < 1e-14) return {PathOutcome::stalled, opts.barrier_growth * model.degree() / t};
        xn = x + alpha * dx;
      }
      const double slope = g.dot(dx);
      while (fn > f + 0.01 * alpha * slope) {
        alpha *= 0.5;
        if (alpha < 1e-12) break;
        xn = x + alpha * dx;
        if (!model.eval(xn, phase1, t, &fn, nullptr, nullptr)) fn = INFINITY;
      }
      if (alpha < 1e-12) {
        // Round-off dominates the merit decrease; treat the point as centred.
        if (lambda2 < 1e-5) break;
        return {PathOutcome::stalled, opts.barrier_growth * model.degree() / t};
      }
      x = xn;
      if (phase1 && x(model.n()) < 0.0) return {PathOutcome::early_stop, model.degree() / t};
    }
    const double gap = model.degree() / t;
    if (gap <= gap_target) return {PathOutcome::converged, gap};
    t *= opts.barrier_growth;
  }
}

}  // namespace

ConicSolution solve_conic(const ConicProblem& problem, const SolverOptions& opts,
                          const Eigen::VectorXd& hint) {
  problem.validate();
  const Model model(problem, opts);
  const int n = problem.size();
  ConicSolution sol;

  VectorXd x0 = VectorXd::Zero(n);
  if (hint.size() == n) x0 = hint.cwiseMax(-0.5 * opts.variable_bound).cwiseMin(0.5 * opts.variable_bound);

  const auto p = static_cast<Eigen::Index>(problem.equalities.size());
  MatrixXd N;
  if (p > 0) {
    MatrixXd A = MatrixXd::Zero(p, n);
    VectorXd b(p);
    for (Eigen::Index r = 0; r < p; ++r) {
      const auto& e = problem.equalities[static_cast<std::size_t>(r)];
      for (const auto& [i, a] : e.terms) A(r, i) += a;
      b(r) = -e.constant;
    }
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
    x0 += cod.solve(VectorXd(b - A * x0));
    if ((A * x0 - b).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + b.cwiseAbs().maxCoeff())) {
      sol.status = SolveStatus::infeasible;
      sol.message = "inconsistent equality constraints";
      return sol;
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
    const Eigen::Index rank = qr.rank();
    const MatrixXd Q = qr.householderQ();
    N = Q.rightCols(n - rank);
  } else {
    N = MatrixXd::Identity(n, n);
  }

  VectorXd x(n + 1);
  x.head(n) = x0;
  x(n) = 0.0;
  double fdummy = 0.0;
  int steps = 0;

  if (!model.eval(x, true, 1.0, &fdummy, nullptr, nullptr)) {
    double s0 = 1.0;
    x(n) = s0;
    while (!model.eval(x, true, 1.0, &fdummy, nullptr, nullptr)) {
      s0 *= 4.0;
      if (s0 > 1e15) {
        sol.status = SolveStatus::numerical_failure;
        sol.message = "no relaxed starting point";
        return sol;
      }
      x(n) = s0;
    }
    MatrixXd N1 = MatrixXd::Zero(n + 1, N.cols() + 1);
    N1.topLeftCorner(n, N.cols()) = N;
    N1(n, N.cols()) = 1.0;
    const PathOutcome ph1 = follow_path(model, x, N1, true, 1.0, opts, 1e-10, steps);
    sol.phase_one_steps = steps;
    if (ph1.kind != PathOutcome::early_stop) {
      sol.x = x.head(n);
      sol.newton_steps = steps;
      if (ph1.kind == PathOutcome::converged || x(n) >= 0.0) {
        sol.status = SolveStatus::infeasible;
        sol.message = "phase one optimum " + std::to_string(x(n)) + " is not negative";
      } else {
        sol.status = SolveStatus::numerical_failure;
        sol.message = "phase one stalled";
      }
      return sol;
    }
    x(n) = 0.0;
  }

  MatrixXd N2 = MatrixXd::Zero(n + 1, N.cols());
  N2.topRows(n) = N;
  const PathOutcome ph2 = follow_path(model, x, N2, false, 1.0, opts, opts.gap_tolerance, steps);
  sol.x = x.head(n);
  sol.newton_steps = steps;
  sol.gap = ph2.gap;
  sol.objective = problem.objective_value(sol.x);
  if (ph2.kind == PathOutcome::converged ||
      (ph2.kind != PathOutcome::early_stop && ph2.gap <= opts.acceptable_gap)) {
    sol.status = SolveStatus::optimal;
  } else {
    sol.status = SolveStatus::numerical_failure;
    sol.message = ph2.kind == PathOutcome::budget ? "Newton step budget exhausted"
                                                  : "Newton iteration stalled";
  }
  return sol;
}

}  // namespace masr
