#pragma once

#include "lcu/types.hpp"

namespace lcu {

// Family of projections P_j derived from one factorization of the active-set
// Gram block. For j in the base set S, P_j projects onto col(A_{:S\{j}})
// using a Schur-complement downdate of Pi = (A_S^T A_S)^{-1}; for j outside S,
// P_j is the base projection onto col(A_{:S}).
//
// The downdate is applied through the vectors g_q = A_S Pi_{:q}, which satisfy
// A_S^T g_q = e_q, so that P_{S\{q}} v = P_S v - (g_q^T v / Pi_qq) g_q and
// (I - P_{S\{q}}) A_{:q} = g_q / Pi_qq.
class ProjectionFamily {
 public:
  // The design must outlive the family. Columns A_{:S} must be independent.
  ProjectionFamily(const Matrix& design, IndexList active_set);

  Vector apply(Index j, const Vector& v) const;             // P_j v
  Vector complement_apply(Index j, const Vector& v) const;  // (I - P_j) v
  Vector residual_column(Index j) const;                    // (I - P_j) A_:j

  const IndexList& active_set() const { return active_; }
  bool in_active_set(Index j) const { return position(j) >= 0; }

 private:
  int position(Index j) const;

  const Matrix* design_;
  IndexList active_;
  std::vector<int> pos_;   // column index -> position in active_, or -1
  Matrix cols_;            // A_{:S}
  Matrix pi_;              // (A_S^T A_S)^{-1}
  Matrix gcols_;           // A_S Pi, column q is g_q with ||g_q||^2 = Pi_qq
};

}  // namespace lcu
