#include "masr/conic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace masr {

LinearForm& LinearForm::add(int index, double coeff) {
  if (coeff != 0.0) terms.emplace_back(index, coeff);
  return *this;
}

double LinearForm::evaluate(const Eigen::VectorXd& z) const {
  double v = constant;
  for (const auto& [i, a] : terms) v += a * z(i);
  return v;
}

Eigen::MatrixXd LmiBlock::evaluate(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd out = constant;
  for (const auto& [i, c] : terms) out += z(i) * c;
  return out;
}

bool ConstraintReport::feasible(double tol) const {
  return max_equality_residual <= tol && min_inequality_slack >= -tol && min_bound_slack >= -tol &&
         min_soc_slack >= -tol && min_lmi_eigenvalue >= -tol && min_log_constraint >= -tol;
}

int ConicProblem::add_variable(const std::string& name, double lo, double hi) {
  names.push_back(name);
  lower.push_back(lo);
  upper.push_back(hi);
  return size() - 1;
}

std::vector<int> ConicProblem::add_variables(const std::string& name, int count, double lo,
                                             double hi) {
  std::vector<int> out;
  for (int i = 0; i < count; ++i) out.push_back(add_variable(name + "[" + std::to_string(i) + "]", lo, hi));
  return out;
}

void ConicProblem::add_inequality(LinearForm f, std::string label) {
  inequalities.push_back(std::move(f));
  inequality_labels.push_back(std::move(label));
}

double ConicProblem::objective_value(const Eigen::VectorXd& z) const {
  double v = objective.evaluate(z);
  for (const auto& t : objective_logs) v += t.weight * std::log(t.argument.evaluate(z));
  return v;
}

ConstraintReport ConicProblem::check(const Eigen::VectorXd& z) const {
  ConstraintReport r;
  for (const auto& e : equalities)
    r.max_equality_residual = std::max(r.max_equality_residual, std::abs(e.evaluate(z)));
  for (const auto& f : inequalities) r.min_inequality_slack = std::min(r.min_inequality_slack, f.evaluate(z));
  for (int i = 0; i < size(); ++i) {
    r.min_bound_slack = std::min({r.min_bound_slack, z(i) - lower[static_cast<std::size_t>(i)],
                                  upper[static_cast<std::size_t>(i)] - z(i)});
  }
  for (const auto& s : socs) {
    double sq = 0.0;
    for (const auto& row : s.rows) sq += std::pow(row.evaluate(z), 2);
    r.min_soc_slack = std::min(r.min_soc_slack, s.bound.evaluate(z) - std::sqrt(sq));
  }
  for (const auto& b : lmis) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.evaluate(z), Eigen::EigenvaluesOnly);
    r.min_lmi_eigenvalue = std::min(r.min_lmi_eigenvalue, es.eigenvalues()(0));
  }
  for (const auto& lc : log_constraints) {
    double v = lc.linear.evaluate(z);
    for (const auto& t : lc.logs) v += t.weight * std::log(t.argument.evaluate(z));
    r.min_log_constraint = std::min(r.min_log_constraint, std::isnan(v) ? -INFINITY : v);
  }
  return r;
}

void ConicProblem::validate() const {
  const int n = size();
  if (lower.size() != names.size() || upper.size() != names.size())
    throw std::invalid_argument("bound vectors out of sync with variables");
  auto check_form = [n](const LinearForm& f) {
    for (const auto& [i, a] : f.terms)
      if (i < 0 || i >= n) throw std::invalid_argument("decision index out of range");
  };
  check_form(objective);
  for (const auto& t : objective_logs) {
    check_form(t.argument);
    if (t.weight < 0.0) throw std::invalid_argument("log objective weight must be nonnegative");
  }
  for (const auto& f : inequalities) check_form(f);
  for (const auto& f : equalities) check_form(f);
  for (const auto& s : socs) {
    check_form(s.bound);
    for (const auto& r : s.rows) check_form(r);
  }
  for (const auto& lc : log_constraints) {
    check_form(lc.linear);
    for (const auto& t : lc.logs) {
      check_form(t.argument);
      if (t.weight < 0.0) throw std::invalid_argument("log constraint weight must be nonnegative");
    }
  }
  for (const auto& b : lmis) {
    if (b.constant.rows() != b.constant.cols()) throw std::invalid_argument("LMI not square");
    auto sym = [&](const Eigen::MatrixXd& m) {
      if (m.rows() != b.dim() || m.cols() != b.dim())
        throw std::invalid_argument("LMI coefficient shape mismatch in " + b.label);
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("LMI coefficient not symmetric in " + b.label);
    };
    sym(b.constant);
    for (const auto& [i, c] : b.terms) {
      if (i < 0 || i >= n) throw std::invalid_argument("decision index out of range");
      sym(c);
    }
  }
}

double QuadraticForm::evaluate(const Eigen::VectorXd& z, const cvec& x) const {
  const cmat q = Q.evaluate(z);
  const cmat g0 = g.evaluate(z);
  const cd quad = x.dot(q * x);
  const cd lin = g0.col(0).dot(x);
  return quad.real() + 2.0 * lin.real() + c.evaluate_scalar(z).real();
}

Eigen::MatrixXd complex_to_real_embedding(const cmat& H, double tol) {
  if (H.rows() != H.cols()) throw std::invalid_argument("embedding needs a square matrix");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("matrix is not Hermitian");
  const Eigen::Index n = H.rows();
  const cmat Hs = 0.5 * (H + H.adjoint());
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = Hs.real();
  out.topRightCorner(n, n) = -Hs.imag();
  out.bottomLeftCorner(n, n) = Hs.imag();
  out.bottomRightCorner(n, n) = Hs.real();
  return out;
}

LmiBlock embed(const AffineMatrix& H, std::string label, double tol) {
  LmiBlock b;
  b.label = std::move(label);
  b.constant = complex_to_real_embedding(H.constant(), tol);
  for (const auto& [i, c] : H.terms()) {
    if (c.cwiseAbs().maxCoeff() == 0.0) continue;
    b.terms.emplace_back(i, complex_to_real_embedding(c, tol));
  }
  return b;
}

AffineMatrix s_procedure_lmi(const QuadraticForm& f0, const std::vector<QuadraticConstraint>& fj,
                             const std::vector<int>& multipliers) {
  if (fj.size() != multipliers.size())
    throw std::invalid_argument("one multiplier per quadratic constraint");
  const Eigen::Index n = f0.Q.rows();
  if (f0.Q.cols() != n || f0.g.rows() != n || f0.g.cols() != 1 || f0.c.rows() != 1)
    throw std::invalid_argument("quadratic form dimension mismatch");
  AffineMatrix Q = f0.Q, g = f0.g, c = f0.c;
  for (std::size_t j = 0; j < fj.size(); ++j) {
    const auto& q = fj[j];
    if (q.Q.rows() != n || q.Q.cols() != n || q.g.size() != n)
      throw std::invalid_argument("constraint dimension mismatch");
    Q.add_term(multipliers[j], -q.Q);
    g.add_term(multipliers[j], -cmat(q.g));
    c.add_term(multipliers[j], cmat::Constant(1, 1, -q.c));
  }
  return AffineMatrix::blocks({{Q, g}, {g.adjoint(), c}});
}

AffineMatrix ball_s_procedure_lmi(const QuadraticForm& f0, const std::vector<BallBlock>& balls) {
  const Eigen::Index n = f0.Q.rows();
  Eigen::Index total = 0;
  for (const auto& b : balls) total += b.size;
  if (total != n || f0.Q.cols() != n || f0.g.rows() != n || f0.c.rows() != 1)
    throw std::invalid_argument("quadratic form dimension mismatch");
  Eigen::VectorXcd d(n);
  Eigen::Index off = 0;
  for (const auto& b : balls) {
    if (b.radius < 0.0) throw std::invalid_argument("negative radius");
    d.segment(off, b.size).setConstant(b.radius);
    off += b.size;
  }
  const cmat D = d.asDiagonal();
  AffineMatrix Q = D * f0.Q * D;
  AffineMatrix g = D * f0.g;
  AffineMatrix c = f0.c;
  off = 0;
  for (const auto& b : balls) {
    cmat e = cmat::Zero(n, n);
    e.block(off, off, b.size, b.size).setIdentity();
    Q.add_term(b.multiplier, e);
    c.add_term(b.multiplier, cmat::Constant(1, 1, -1.0));
    off += b.size;
  }
  return AffineMatrix::blocks({{Q, g}, {g.adjoint(), c}});
}

AffineMatrix sign_definiteness_lmi(const AffineMatrix& B, const AffineMatrix& U, const cmat& vhv,
                                   double xi, int multiplier) {
  const Eigen::Index p = B.rows();
  const Eigen::Index k = U.rows();
  if (B.cols() != p || U.cols() != p || vhv.rows() != p || vhv.cols() != p)
    throw std::invalid_argument("sign-definiteness dimension mismatch");
  if (xi < 0.0) throw std::invalid_argument("negative radius");
  AffineMatrix top = B;
  top.add_term(multiplier, -vhv);
  AffineMatrix corner(k, k);
  corner.add_term(multiplier, cmat::Identity(k, k));
  const AffineMatrix border = cd(-xi, 0.0) * U;
  return AffineMatrix::blocks({{top, border.adjoint()}, {border, corner}});
}

std::string to_text(const ConicProblem& problem) {
  std::ostringstream os;
  os << "conic_problem\n";
  os << "  variables " << problem.size() << "\n";
  for (int i = 0; i < problem.size(); ++i) {
    os << "    [" << i << "] " << problem.names[static_cast<std::size_t>(i)];
    const double lo = problem.lower[static_cast<std::size_t>(i)];
    const double hi = problem.upper[static_cast<std::size_t>(i)];
    if (std::isfinite(lo)) os << " lo=" << lo;
    if (std::isfinite(hi)) os << " hi=" << hi;
    os << "\n";
  }
  os << "  objective linear_terms=" << problem.objective.terms.size()
     << " log_terms=" << problem.objective_logs.size() << "\n";
  os << "  equalities " << problem.equalities.size() << "\n";
  os << "  inequalities " << problem.inequalities.size() << "\n";
  os << "  socs " << problem.socs.size() << "\n";
  for (const auto& s : problem.socs) os << "    " << s.label << " dim=" << s.rows.size() << "\n";
  os << "  lmis " << problem.lmis.size() << "\n";
  for (const auto& b : problem.lmis) {
    std::size_t nnz = 0;
    for (const auto& [i, c] : b.terms) nnz += static_cast<std::size_t>((c.array() != 0.0).count());
    os << "    " << b.label << " dim=" << b.dim() << " terms=" << b.terms.size()
       << " coeff_nnz=" << nnz << "\n";
  }
  os << "  log_constraints " << problem.log_constraints.size() << "\n";
  for (const auto& lc : problem.log_constraints)
    os << "    " << lc.label << " logs=" << lc.logs.size() << "\n";
  return os.str();
}

}  // namespace masr
