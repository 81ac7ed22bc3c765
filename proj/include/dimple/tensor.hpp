// Dense 3-way tensor with mode-k matricization, mode-k products, slice
// centering and the SMT1 text format for signed adjacency tensors.
//
// Storage is column-major over (i1, i2, i3): value (i1,i2,i3) lives at
// i1 + n1*(i2 + n2*i3), i.e. slices are contiguous n1 x n2 column-major
// matrices. Matricization follows the usual Kolda-Bader column ordering:
//   M1: (n1) x (n2*n3),  column  i2 + n2*i3
//   M2: (n2) x (n1*n3),  column  i1 + n1*i3
//   M3: (n3) x (n1*n2),  column  i1 + n1*i2   (row l = vec of slice l)
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dimple {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Tensor3 {
 public:
  Tensor3(int n1, int n2, int n3, double fill = 0.0);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int n3() const { return n3_; }
  std::size_t size() const { return v_.size(); }

  // Bounds-checked element access; throws std::out_of_range outside dims.
  double operator()(int i1, int i2, int i3) const {
    check(i1, i2, i3);
    return v_[idx(i1, i2, i3)];
  }
  double& operator()(int i1, int i2, int i3) {
    check(i1, i2, i3);
    return v_[idx(i1, i2, i3)];
  }

  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }

  Eigen::Map<const Matrix> slice(int i3) const;
  Eigen::Map<Matrix> slice(int i3);

  bool operator==(const Tensor3& o) const {
    return n1_ == o.n1_ && n2_ == o.n2_ && n3_ == o.n3_ && v_ == o.v_;
  }

 private:
  std::size_t idx(int i1, int i2, int i3) const {
    return std::size_t(i1) +
           std::size_t(n1_) * (std::size_t(i2) + std::size_t(n2_) * i3);
  }
  void check(int i1, int i2, int i3) const;

  int n1_, n2_, n3_;
  std::vector<double> v_;
};

// Mode-k unfolding, k in {1,2,3}.
Matrix matricize(const Tensor3& x, int mode);

// X x_mode A, where A has as many columns as dim mode of X. Satisfies
// matricize(mode_product(X, A, k), k) == A * matricize(X, k) exactly.
Tensor3 mode_product(const Tensor3& x, const Matrix& a, int mode);

// X x1 Pc x2 Pc with Pc = I - 11^T/n, done by per-slice double centering;
// requires square slices. Each output slice has zero row and column sums.
Tensor3 center(const Tensor3& x);

double frobenius_norm(const Tensor3& x);

// Validation helpers; throw std::invalid_argument on violation.
void validate_signed_adjacency(const Tensor3& a);  // entries in {-1,0,1}, symmetric slices, hollow diagonal
void validate_probability(const Tensor3& p);       // |entries| <= 1, symmetric slices

// SMT1 text format: header "SMT1 n L", then one line "l i j v" per nonzero
// strictly-upper-triangular entry, 1-based indices, v in {-1, 1}. The loader
// rejects diagonal entries, indices out of range, values outside {-1, 1},
// lines with i >= j, and duplicate entries.
void save_smt1(const Tensor3& a, std::ostream& os);
void save_smt1(const Tensor3& a, const std::string& path);
Tensor3 load_smt1(std::istream& is);
Tensor3 load_smt1(const std::string& path);

}  // namespace dimple
