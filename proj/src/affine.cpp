#include "masr/affine.hpp"

#include <stdexcept>

namespace masr {

AffineMatrix::AffineMatrix(Eigen::Index rows, Eigen::Index cols)
    : constant_(cmat::Zero(rows, cols)) {}

AffineMatrix::AffineMatrix(cmat constant) : constant_(std::move(constant)) {}

AffineMatrix AffineMatrix::variable(int index, cd coeff) {
  AffineMatrix out(1, 1);
  out.add_term(index, cmat::Constant(1, 1, coeff));
  return out;
}

AffineMatrix AffineMatrix::complex_vector(const std::vector<int>& re, const std::vector<int>& im) {
  if (re.size() != im.size()) throw std::invalid_argument("real/imaginary index lists differ");
  const auto n = static_cast<Eigen::Index>(re.size());
  AffineMatrix out(n, 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    cmat e = cmat::Zero(n, 1);
    e(k, 0) = 1.0;
    out.add_term(re[static_cast<std::size_t>(k)], e);
    e(k, 0) = cd(0.0, 1.0);
    out.add_term(im[static_cast<std::size_t>(k)], e);
  }
  return out;
}

cmat AffineMatrix::evaluate(const Eigen::VectorXd& z) const {
  cmat out = constant_;
  for (const auto& [i, c] : terms_) out += z(i) * c;
  return out;
}

cd AffineMatrix::evaluate_scalar(const Eigen::VectorXd& z) const {
  if (rows() != 1 || cols() != 1) throw std::invalid_argument("not a scalar expression");
  return evaluate(z)(0, 0);
}

template <class F>
AffineMatrix AffineMatrix::map(F&& f) const {
  AffineMatrix out(f(constant_));
  for (const auto& [i, c] : terms_) out.terms_.emplace(i, f(c));
  return out;
}

AffineMatrix AffineMatrix::adjoint() const {
  return map([](const cmat& m) -> cmat { return m.adjoint(); });
}

AffineMatrix AffineMatrix::conjugate() const {
  return map([](const cmat& m) -> cmat { return m.conjugate(); });
}

AffineMatrix AffineMatrix::transpose() const {
  return map([](const cmat& m) -> cmat { return m.transpose(); });
}

void AffineMatrix::add_term(int index, const cmat& coeff) {
  if (index < 0) throw std::invalid_argument("negative decision index");
  if (coeff.rows() != rows() || coeff.cols() != cols())
    throw std::invalid_argument("coefficient shape mismatch");
  auto it = terms_.find(index);
  if (it == terms_.end())
    terms_.emplace(index, coeff);
  else
    it->second += coeff;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& o) {
  if (o.rows() != rows() || o.cols() != cols())
    throw std::invalid_argument("affine sum shape mismatch");
  constant_ += o.constant_;
  for (const auto& [i, c] : o.terms_) add_term(i, c);
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& o) { return *this += -o; }

AffineMatrix AffineMatrix::operator-() const {
  return map([](const cmat& m) -> cmat { return -m; });
}

AffineMatrix operator*(cd s, const AffineMatrix& a) {
  return a.map([s](const cmat& m) -> cmat { return s * m; });
}

AffineMatrix operator*(const cmat& m, const AffineMatrix& a) {
  if (m.cols() != a.rows()) throw std::invalid_argument("product shape mismatch");
  return a.map([&m](const cmat& c) -> cmat { return m * c; });
}

AffineMatrix operator*(const AffineMatrix& a, const cmat& m) {
  if (a.cols() != m.rows()) throw std::invalid_argument("product shape mismatch");
  return a.map([&m](const cmat& c) -> cmat { return c * m; });
}

namespace {

cmat kron_dense(const cmat& a, const cmat& b) {
  cmat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

AffineMatrix AffineMatrix::kron(const AffineMatrix& a, const cmat& b) {
  return a.map([&b](const cmat& c) -> cmat { return kron_dense(c, b); });
}

AffineMatrix AffineMatrix::kron(const cmat& a, const AffineMatrix& b) {
  return b.map([&a](const cmat& c) -> cmat { return kron_dense(a, c); });
}

AffineMatrix AffineMatrix::blocks(const std::vector<std::vector<AffineMatrix>>& grid) {
  if (grid.empty() || grid.front().empty()) throw std::invalid_argument("empty block grid");
  std::vector<Eigen::Index> heights, widths;
  for (const auto& row : grid) {
    if (row.size() != grid.front().size()) throw std::invalid_argument("ragged block grid");
    heights.push_back(row.front().rows());
  }
  for (const auto& b : grid.front()) widths.push_back(b.cols());
  Eigen::Index total_r = 0, total_c = 0;
  for (auto h : heights) total_r += h;
  for (auto w : widths) total_c += w;

  AffineMatrix out(total_r, total_c);
  Eigen::Index r0 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::Index c0 = 0;
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      const AffineMatrix& b = grid[i][j];
      if (b.rows() != heights[i] || b.cols() != widths[j])
        throw std::invalid_argument("block shape mismatch");
      out.constant_.block(r0, c0, b.rows(), b.cols()) = b.constant_;
      for (const auto& [idx, c] : b.terms_) {
        auto it = out.terms_.find(idx);
        if (it == out.terms_.end())
          it = out.terms_.emplace(idx, cmat::Zero(total_r, total_c)).first;
        it->second.block(r0, c0, b.rows(), b.cols()) += c;
      }
      c0 += widths[j];
    }
    r0 += heights[i];
  }
  return out;
}

}  // namespace masr
