// Shared helpers for the test suites: seeded random matrices, Haar-ish
// orthonormal factors and projector comparison.
#pragma once

#include <Eigen/Dense>

#include "dimple/linalg.hpp"
#include "dimple/rng.hpp"
#include "dimple/tensor.hpp"

namespace testutil {

inline dimple::Matrix random_matrix(int rows, int cols, dimple::Rng& rng) {
  dimple::Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// Orthonormal columns via QR of a Gaussian matrix.
inline dimple::Matrix random_orthonormal(int rows, int cols, dimple::Rng& rng) {
  const dimple::Matrix g = random_matrix(rows, cols, rng);
  Eigen::HouseholderQR<dimple::Matrix> qr(g);
  dimple::Matrix q = qr.householderQ() * dimple::Matrix::Identity(rows, cols);
  return q;
}

inline dimple::Tensor3 random_tensor(int n1, int n2, int n3, dimple::Rng& rng) {
  dimple::Tensor3 x(n1, n2, n3);
  for (int l = 0; l < n3; ++l)
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) x(i, j, l) = rng.normal();
  return x;
}

// ||A A^T - B B^T||_F for orthonormal factors of equal shape.
inline double projector_dist(const dimple::Matrix& a, const dimple::Matrix& b) {
  return (a * a.transpose() - b * b.transpose()).norm();
}

}  // namespace testutil
