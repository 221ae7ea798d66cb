// Real conic programs (linear, second-order, PSD and log terms) and the
// LMI constructions used for norm-bounded robust constraints.
#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "masr/affine.hpp"

namespace masr {

constexpr double kPsdTolerance = 1e-6;

struct LinearForm {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinearForm() = default;
  explicit LinearForm(double c) : constant(c) {}
  LinearForm& add(int index, double coeff);
  double evaluate(const Eigen::VectorXd& z) const;
};

struct LmiBlock {
  std::string label;
  Eigen::MatrixXd constant;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;

  Eigen::Index dim() const { return constant.rows(); }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& z) const;
};

// ||rows(z)||_2 <= bound(z)
struct SocBlock {
  std::string label;
  std::vector<LinearForm> rows;
  LinearForm bound;
};

struct LogTerm {
  double weight = 1.0;  // must be nonnegative
  LinearForm argument;
};

// sum_k weight_k * ln(argument_k(z)) + linear(z) >= 0
struct LogConstraint {
  std::string label;
  std::vector<LogTerm> logs;
  LinearForm linear;
};

struct ConstraintReport {
  double max_equality_residual = 0.0;
  double min_inequality_slack = std::numeric_limits<double>::infinity();
  double min_bound_slack = std::numeric_limits<double>::infinity();
  double min_soc_slack = std::numeric_limits<double>::infinity();
  double min_lmi_eigenvalue = std::numeric_limits<double>::infinity();
  double min_log_constraint = std::numeric_limits<double>::infinity();

  bool feasible(double tol = kPsdTolerance) const;
};

// maximize objective(z) + sum weight_k ln(argument_k(z)) subject to blocks.
struct ConicProblem {
  std::vector<std::string> names;
  std::vector<double> lower;
  std::vector<double> upper;

  LinearForm objective;
  std::vector<LogTerm> objective_logs;

  std::vector<LinearForm> inequalities;  // >= 0
  std::vector<std::string> inequality_labels;
  std::vector<LinearForm> equalities;    // == 0
  std::vector<LmiBlock> lmis;
  std::vector<SocBlock> socs;
  std::vector<LogConstraint> log_constraints;

  int add_variable(const std::string& name,
                   double lo = -std::numeric_limits<double>::infinity(),
                   double hi = std::numeric_limits<double>::infinity());
  std::vector<int> add_variables(const std::string& name, int count,
                                 double lo = -std::numeric_limits<double>::infinity(),
                                 double hi = std::numeric_limits<double>::infinity());
  void add_inequality(LinearForm f, std::string label = {});

  int size() const { return static_cast<int>(names.size()); }
  double objective_value(const Eigen::VectorXd& z) const;
  ConstraintReport check(const Eigen::VectorXd& z) const;
  // Throws std::invalid_argument on out-of-range indices or asymmetric blocks.
  void validate() const;
};

// Quadratic x^H Q x + 2 Re(g^H x) + c with coefficients affine in z.
struct QuadraticForm {
  AffineMatrix Q;  // n x n
  AffineMatrix g;  // n x 1
  AffineMatrix c;  // 1 x 1

  double evaluate(const Eigen::VectorXd& z, const cvec& x) const;
};

// Constant quadratic used as an uncertainty-set description.
struct QuadraticConstraint {
  cmat Q;
  cvec g;
  double c = 0.0;
};

Eigen::MatrixXd complex_to_real_embedding(const cmat& H, double tol = 1e-9);

LmiBlock embed(const AffineMatrix& H, std::string label, double tol = 1e-9);

// f0(x) >= 0 whenever every f_j(x) >= 0 is implied by
// [[Q0 - sum w_j Q_j, g0 - sum w_j g_j], [.., c0 - sum w_j c_j]] >= 0, w_j >= 0.
AffineMatrix s_procedure_lmi(const QuadraticForm& f0, const std::vector<QuadraticConstraint>& fj,
                             const std::vector<int>& multipliers);

struct BallBlock {
  Eigen::Index size = 0;
  double radius = 0.0;
  int multiplier = -1;  // decision index of the scaled multiplier
};

// Robust f0(x) >= 0 over x = [x_1; ...; x_P] with ||x_j|| <= radius_j, written
// after the congruence x_j = radius_j y_j:
// [[D Q0 D + blkdiag(mu_j I), D g0], [g0^H D, c0 - sum mu_j]] >= 0.
AffineMatrix ball_s_procedure_lmi(const QuadraticForm& f0, const std::vector<BallBlock>& balls);

// B + U^H X V + V^H X^H U >= 0 for all ||X|| <= xi is implied by
// [[B - b V^H V, -xi U^H], [-xi U, b I]] >= 0 with b >= 0. `vhv` may be any
// constant upper bound of V^H V.
AffineMatrix sign_definiteness_lmi(const AffineMatrix& B, const AffineMatrix& U, const cmat& vhv,
                                   double xi, int multiplier);

// Structured text dump (dimensions, blocks, sparsity) for inspection.
std::string to_text(const ConicProblem& problem);

}  // namespace masr
