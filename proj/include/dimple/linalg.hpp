// Truncated SVD, row-norm regularization with re-orthonormalization,
// orthogonal Procrustes alignment and subspace distances.
#pragma once

#include <Eigen/Dense>

namespace dimple {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ||Q^T Q - I||_F <= tol.
bool is_orthonormal(const Matrix& q, double tol = 1e-10);

// r leading left singular vectors of M. Full SVD when min(rows, cols) <= 512,
// symmetric eigendecomposition of the Gram matrix on the smaller side
// otherwise. Column signs are not normalized; compare projectors, not vectors.
// If sv is non-null it receives all min(rows, cols) singular values
// (Gram path: the leading r only).
Matrix svd_left(const Matrix& m, int r, Vector* sv = nullptr);

// Rows with norm > delta are rescaled to norm delta, then the clipped matrix
// is re-orthonormalized by taking its r leading left singular vectors.
// Throws if clipping leaves a matrix of numerical rank below r.
Matrix regularize(const Matrix& u, double delta);

// r x r orthogonal O minimizing ||Uhat - U O||_F.
Matrix align(const Matrix& u, const Matrix& uhat);

struct SinTheta {
  double spectral;   // sqrt(1 - sigma_min(U^T Uhat)^2)
  double frobenius;  // sqrt(r - ||U^T Uhat||_F^2)
};

// Principal-angle distances between the column spaces of two orthonormal
// factors of the same shape.
SinTheta sin_theta(const Matrix& u, const Matrix& uhat);

// min over orthogonal O of max row norm of (Uhat O - U), with O taken as the
// Frobenius-Procrustes minimizer; always <= sqrt(2) * sin_theta spectral.
double two_to_inf_dist(const Matrix& u, const Matrix& uhat);

// Max Euclidean row norm.
double two_to_inf_norm(const Matrix& m);

// Pc * S * Pc with Pc = I - 11^T/n, via double centering; S must be square.
Matrix center_matrix(const Matrix& s);

}  // namespace dimple
