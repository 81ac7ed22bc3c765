#include "dimple/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace dimple {

namespace {
constexpr double kRankTol = 1e-12;  // relative singular-value floor
constexpr int kFullSvdLimit = 512;  // crossover to the Gram path
}  // namespace

bool is_orthonormal(const Matrix& q, double tol) {
  if (q.rows() < q.cols()) return false;
  const Matrix g = q.transpose() * q;
  return (g - Matrix::Identity(q.cols(), q.cols())).norm() <= tol;
}

Matrix svd_left(const Matrix& m, int r, Vector* sv) {
  const int rows = int(m.rows()), cols = int(m.cols());
  const int p = std::min(rows, cols);
  if (r < 1 || r > p)
    throw std::invalid_argument("svd_left: r must be in [1, min(rows, cols)]");

  if (p <= kFullSvdLimit) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success)
      throw std::runtime_error("svd_left: SVD failed to converge");
    if (sv) *sv = svd.singularValues();
    return svd.matrixU().leftCols(r);
  }

  if (rows <= cols) {
    // Eigenvectors of M M^T ordered by eigenvalue = sigma^2, which also gives
    // the |eigenvalue| ordering needed for symmetric indefinite inputs.
    Matrix g(rows, rows);
    g.noalias() = m * m.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("svd_left: eigendecomposition failed");
    Matrix u(rows, r);
    Vector s(r);
    for (int k = 0; k < r; ++k) {
      u.col(k) = es.eigenvectors().col(rows - 1 - k);
      s(k) = std::sqrt(std::max(0.0, es.eigenvalues()(rows - 1 - k)));
    }
    if (sv) *sv = s;
    return u;
  }

  Matrix g(cols, cols);
  g.noalias() = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("svd_left: eigendecomposition failed");
  const double lam_max = std::max(0.0, es.eigenvalues()(cols - 1));
  Matrix u(rows, r);
  Vector s(r);
  for (int k = 0; k < r; ++k) {
    const double lam = std::max(0.0, es.eigenvalues()(cols - 1 - k));
    s(k) = std::sqrt(lam);
    if (lam <= lam_max * kRankTol * kRankTol)
      throw std::runtime_error("svd_left: rank below r on the Gram path");
    u.col(k).noalias() = m * es.eigenvectors().col(cols - 1 - k) / s(k);
  }
  if (sv) *sv = s;
  return u;
}

Matrix regularize(const Matrix& u, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("regularize: delta must be > 0");
  const int r = int(u.cols());
  Matrix clipped = u;
  for (int i = 0; i < u.rows(); ++i) {
    const double norm = u.row(i).norm();
    if (norm > delta) clipped.row(i) *= delta / norm;
  }
  Vector sv;
  Matrix out = svd_left(clipped, r, &sv);
  if (sv(0) <= 0.0 || sv(r - 1) <= kRankTol * sv(0))
    throw std::runtime_error("regularize: clipped matrix is rank-deficient below r");
  return out;
}

Matrix align(const Matrix& u, const Matrix& uhat) {
  if (u.rows() != uhat.rows() || u.cols() != uhat.cols())
    throw std::invalid_argument("align: shape mismatch");
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * uhat,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

SinTheta sin_theta(const Matrix& u, const Matrix& uhat) {
  if (u.rows() != uhat.rows() || u.cols() != uhat.cols())
    throw std::invalid_argument("sin_theta: shape mismatch");
  if (!is_orthonormal(u, 1e-8) || !is_orthonormal(uhat, 1e-8))
    throw std::invalid_argument("sin_theta: inputs must have orthonormal columns");
  const int r = int(u.cols());
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * uhat);
  const Vector& s = svd.singularValues();
  const double smin = s(r - 1);
  SinTheta d;
  d.spectral = std::sqrt(std::max(0.0, 1.0 - smin * smin));
  d.frobenius = std::sqrt(std::max(0.0, double(r) - s.squaredNorm()));
  return d;
}

double two_to_inf_dist(const Matrix& u, const Matrix& uhat) {
  if (u.rows() != uhat.rows() || u.cols() != uhat.cols())
    throw std::invalid_argument("two_to_inf_dist: shape mismatch");
  const Matrix o = align(uhat, u);  // minimizes ||U - Uhat O||_F
  const double d = two_to_inf_norm(uhat * o - u);
  const double bound = std::sqrt(2.0) * sin_theta(u, uhat).spectral;
  if (d > bound + 1e-10)
    throw std::runtime_error("two_to_inf_dist: sqrt(2) sin-theta bound violated");
  return d;
}

double two_to_inf_norm(const Matrix& m) {
  return m.rows() == 0 ? 0.0 : m.rowwise().norm().maxCoeff();
}

Matrix center_matrix(const Matrix& s) {
  if (s.rows() != s.cols())
    throw std::invalid_argument("center_matrix: matrix must be square");
  const Vector row_mean = s.rowwise().mean();
  const Eigen::RowVectorXd col_mean = s.colwise().mean();
  Matrix out = s;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean;
  out.array() += row_mean.mean();
  return out;
}

}  // namespace dimple
