// Complex matrices that are affine in a real decision vector.
#pragma once

#include <map>
#include <vector>

#include "masr/geometry.hpp"

namespace masr {

class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(Eigen::Index rows, Eigen::Index cols);
  explicit AffineMatrix(cmat constant);

  // Real scalar decision variable times `coeff` (1 x 1).
  static AffineMatrix variable(int index, cd coeff = cd(1.0, 0.0));
  // Column vector whose entry k is z[re[k]] + j z[im[k]].
  static AffineMatrix complex_vector(const std::vector<int>& re, const std::vector<int>& im);

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }
  const cmat& constant() const { return constant_; }
  const std::map<int, cmat>& terms() const { return terms_; }

  cmat evaluate(const Eigen::VectorXd& z) const;
  cd evaluate_scalar(const Eigen::VectorXd& z) const;

  AffineMatrix adjoint() const;
  AffineMatrix conjugate() const;
  AffineMatrix transpose() const;

  void add_term(int index, const cmat& coeff);

  AffineMatrix& operator+=(const AffineMatrix& o);
  AffineMatrix& operator-=(const AffineMatrix& o);
  AffineMatrix operator-() const;

  friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
  friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
  friend AffineMatrix operator*(cd s, const AffineMatrix& a);
  friend AffineMatrix operator*(const AffineMatrix& a, cd s) { return s * a; }
  friend AffineMatrix operator*(const cmat& m, const AffineMatrix& a);
  friend AffineMatrix operator*(const AffineMatrix& a, const cmat& m);

  static AffineMatrix kron(const AffineMatrix& a, const cmat& b);
  static AffineMatrix kron(const cmat& a, const AffineMatrix& b);

  // Block grid; every row of blocks shares a height and every column a width.
  static AffineMatrix blocks(const std::vector<std::vector<AffineMatrix>>& grid);

 private:
  template <class F>
  AffineMatrix map(F&& f) const;

  cmat constant_;
  std::map<int, cmat> terms_;
};

}  // namespace masr
