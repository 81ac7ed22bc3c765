#include "dimple/tensor.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dimple {

Tensor3::Tensor3(int n1, int n2, int n3, double fill) : n1_(n1), n2_(n2), n3_(n3) {
  if (n1 < 1 || n2 < 1 || n3 < 1)
    throw std::invalid_argument("Tensor3: dims must be positive");
  v_.assign(std::size_t(n1) * n2 * n3, fill);
}

void Tensor3::check(int i1, int i2, int i3) const {
  if (i1 < 0 || i1 >= n1_ || i2 < 0 || i2 >= n2_ || i3 < 0 || i3 >= n3_) {
    std::ostringstream ss;
    ss << "Tensor3: index (" << i1 << "," << i2 << "," << i3
       << ") outside dims (" << n1_ << "," << n2_ << "," << n3_ << ")";
    throw std::out_of_range(ss.str());
  }
}

Eigen::Map<const Matrix> Tensor3::slice(int i3) const {
  check(0, 0, i3);
  return Eigen::Map<const Matrix>(v_.data() + std::size_t(n1_) * n2_ * i3, n1_, n2_);
}

Eigen::Map<Matrix> Tensor3::slice(int i3) {
  check(0, 0, i3);
  return Eigen::Map<Matrix>(v_.data() + std::size_t(n1_) * n2_ * i3, n1_, n2_);
}

Matrix matricize(const Tensor3& x, int mode) {
  const int n1 = x.n1(), n2 = x.n2(), n3 = x.n3();
  switch (mode) {
    case 1: {
      // Contiguous in storage: columns are already mode-1 fibers.
      return Eigen::Map<const Matrix>(x.data(), n1, std::size_t(n2) * n3);
    }
    case 2: {
      Matrix m(n2, std::size_t(n1) * n3);
      for (int l = 0; l < n3; ++l)
        m.block(0, std::size_t(n1) * l, n2, n1) = x.slice(l).transpose();
      return m;
    }
    case 3: {
      Matrix m(n3, std::size_t(n1) * n2);
      for (int l = 0; l < n3; ++l) {
        auto s = x.slice(l);
        m.row(l) = Eigen::Map<const Vector>(s.data(), std::size_t(n1) * n2);
      }
      return m;
    }
    default:
      throw std::invalid_argument("matricize: mode must be 1, 2 or 3");
  }
}

Tensor3 mode_product(const Tensor3& x, const Matrix& a, int mode) {
  const int n1 = x.n1(), n2 = x.n2(), n3 = x.n3();
  const int m = int(a.rows());
  switch (mode) {
    case 1: {
      if (a.cols() != n1)
        throw std::invalid_argument("mode_product: A cols must equal dim 1");
      Tensor3 y(m, n2, n3);
      for (int l = 0; l < n3; ++l) y.slice(l).noalias() = a * x.slice(l);
      return y;
    }
    case 2: {
      if (a.cols() != n2)
        throw std::invalid_argument("mode_product: A cols must equal dim 2");
      Tensor3 y(n1, m, n3);
      for (int l = 0; l < n3; ++l) y.slice(l).noalias() = x.slice(l) * a.transpose();
      return y;
    }
    case 3: {
      if (a.cols() != n3)
        throw std::invalid_argument("mode_product: A cols must equal dim 3");
      Tensor3 y(n1, n2, m);
      for (int w = 0; w < m; ++w) {
        auto out = y.slice(w);
        out.setZero();
        for (int l = 0; l < n3; ++l) out.noalias() += a(w, l) * x.slice(l);
      }
      return y;
    }
    default:
      throw std::invalid_argument("mode_product: mode must be 1, 2 or 3");
  }
}

Tensor3 center(const Tensor3& x) {
  const int n = x.n1();
  if (x.n2() != n)
    throw std::invalid_argument("center: slices must be square");
  Tensor3 y(n, n, x.n3());
  for (int l = 0; l < x.n3(); ++l) {
    auto s = x.slice(l);
    const Vector row_mean = s.rowwise().mean();
    const Eigen::RowVectorXd col_mean = s.colwise().mean();
    const double total_mean = row_mean.mean();
    auto out = y.slice(l);
    out = s;
    out.colwise() -= row_mean;
    out.rowwise() -= col_mean;
    out.array() += total_mean;
  }
  return y;
}

double frobenius_norm(const Tensor3& x) {
  return Eigen::Map<const Vector>(x.data(), x.size()).norm();
}

void validate_signed_adjacency(const Tensor3& a) {
  const int n = a.n1();
  if (a.n2() != n)
    throw std::invalid_argument("signed adjacency: slices must be square");
  for (int l = 0; l < a.n3(); ++l) {
    auto s = a.slice(l);
    for (int j = 0; j < n; ++j) {
      if (s(j, j) != 0.0)
        throw std::invalid_argument("signed adjacency: nonzero diagonal");
      for (int i = 0; i < n; ++i) {
        const double v = s(i, j);
        if (v != 0.0 && v != 1.0 && v != -1.0)
          throw std::invalid_argument("signed adjacency: entries must be -1, 0 or 1");
        if (s(i, j) != s(j, i))
          throw std::invalid_argument("signed adjacency: slices must be symmetric");
      }
    }
  }
}

void validate_probability(const Tensor3& p) {
  const int n = p.n1();
  if (p.n2() != n)
    throw std::invalid_argument("probability tensor: slices must be square");
  for (int l = 0; l < p.n3(); ++l) {
    auto s = p.slice(l);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (std::abs(s(i, j)) > 1.0)
          throw std::invalid_argument("probability tensor: |entries| must be <= 1");
        if (std::abs(s(i, j) - s(j, i)) > 1e-12)
          throw std::invalid_argument("probability tensor: slices must be symmetric");
      }
  }
}

void save_smt1(const Tensor3& a, std::ostream& os) {
  validate_signed_adjacency(a);
  os << "SMT1 " << a.n1() << ' ' << a.n3() << '\n';
  for (int l = 0; l < a.n3(); ++l) {
    auto s = a.slice(l);
    for (int j = 1; j < a.n1(); ++j)
      for (int i = 0; i < j; ++i)
        if (s(i, j) != 0.0)
          os << l + 1 << ' ' << i + 1 << ' ' << j + 1 << ' '
             << (s(i, j) > 0 ? 1 : -1) << '\n';
  }
}

void save_smt1(const Tensor3& a, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_smt1: cannot open " + path);
  save_smt1(a, os);
}

Tensor3 load_smt1(std::istream& is) {
  std::string magic;
  int n = 0, num_layers = 0;
  if (!(is >> magic >> n >> num_layers) || magic != "SMT1")
    throw std::invalid_argument("load_smt1: bad header, expected 'SMT1 n L'");
  if (n < 1 || num_layers < 1)
    throw std::invalid_argument("load_smt1: dims must be positive");
  Tensor3 a(n, n, num_layers);
  std::set<std::tuple<int, int, int>> seen;
  long l, i, j, v;
  while (is >> l >> i >> j >> v) {
    if (l < 1 || l > num_layers) throw std::invalid_argument("load_smt1: layer out of range");
    if (i < 1 || i > n || j < 1 || j > n)
      throw std::invalid_argument("load_smt1: node index out of range");
    if (i == j) throw std::invalid_argument("load_smt1: diagonal entries are not allowed");
    if (i > j) throw std::invalid_argument("load_smt1: entries must be upper-triangular (i < j)");
    if (v != 1 && v != -1) throw std::invalid_argument("load_smt1: value must be -1 or 1");
    if (!seen.insert({int(l), int(i), int(j)}).second)
      throw std::invalid_argument("load_smt1: duplicate entry");
    a(int(i) - 1, int(j) - 1, int(l) - 1) = double(v);
    a(int(j) - 1, int(i) - 1, int(l) - 1) = double(v);
  }
  if (!is.eof() && is.fail())
    throw std::invalid_argument("load_smt1: malformed entry line");
  return a;
}

Tensor3 load_smt1(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_smt1: cannot open " + path);
  return load_smt1(is);
}

}  // namespace dimple
