#include "lcu/projection.hpp"

#include <stdexcept>
#include <string>

namespace lcu {

ProjectionFamily::ProjectionFamily(const Matrix& design, IndexList active_set)
    : design_(&design), active_(std::move(active_set)) {
  const Index n = design.rows();
  const Index p = design.cols();
  const Index k = static_cast<Index>(active_.size());
  if (k > n)
    throw std::invalid_argument("projection: active set larger than sample size");
  pos_.assign(static_cast<std::size_t>(p), -1);
  cols_.resize(n, k);
  for (Index q = 0; q < k; ++q) {
    const Index j = active_[static_cast<std::size_t>(q)];
    if (j < 0 || j >= p)
      throw std::invalid_argument("projection: active index out of range");
    pos_[static_cast<std::size_t>(j)] = static_cast<int>(q);
    cols_.col(q) = design.col(j);
  }
  if (k == 0) return;

  Matrix omega = cols_.transpose() * cols_;
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) {
    // Single retry with diagonal jitter, then fail naming the pivot.
    const double jitter = 1e-12 * omega.trace() / static_cast<double>(k);
    omega.diagonal().array() += jitter;
    llt.compute(omega);
    if (llt.info() != Eigen::Success) {
      Eigen::LDLT<Matrix> ldlt(omega);
      Index pivot = 0;
      for (Index q = 0; q < k; ++q)
        if (ldlt.vectorD()[q] <= 0.0) { pivot = q; break; }
      throw std::runtime_error(
          "projection: singular active Gram block (pivot " +
          std::to_string(active_[static_cast<std::size_t>(pivot)]) + ")");
    }
  }
  pi_ = llt.solve(Matrix::Identity(k, k));
  // Floating-point LLT can silently succeed on a rank-deficient Gram block;
  // verify the computed inverse actually inverts it.
  const Matrix resid = omega * pi_ - Matrix::Identity(k, k);
  Index worst_row = 0, worst_col = 0;
  const double err = resid.cwiseAbs().maxCoeff(&worst_row, &worst_col);
  if (err > 1e-6)
    throw std::runtime_error(
        "projection: singular active Gram block (pivot " +
        std::to_string(active_[static_cast<std::size_t>(worst_col)]) + ")");
  gcols_.noalias() = cols_ * pi_;
}

int ProjectionFamily::position(Index j) const {
  if (j < 0 || j >= static_cast<Index>(pos_.size())) return -1;
  return pos_[static_cast<std::size_t>(j)];
}

Vector ProjectionFamily::apply(Index j, const Vector& v) const {
  if (active_.empty()) return Vector::Zero(v.size());
  Vector w = cols_.transpose() * v;
  Vector out = cols_ * (pi_ * w);
  const int q = position(j);
  if (q >= 0) {
    const double piqq = pi_(q, q);
    out.noalias() -= gcols_.col(q) * (gcols_.col(q).dot(v) / piqq);
  }
  return out;
}

Vector ProjectionFamily::complement_apply(Index j, const Vector& v) const {
  return v - apply(j, v);
}

Vector ProjectionFamily::residual_column(Index j) const {
  if (j < 0 || j >= design_->cols())
    throw std::invalid_argument("projection: column index out of range");
  const int q = position(j);
  if (q >= 0) return gcols_.col(q) / pi_(q, q);
  return complement_apply(j, design_->col(j));
}

}  // namespace lcu
