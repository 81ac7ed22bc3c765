#include "dimple/hooi.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dimple/linalg.hpp"

namespace dimple {

namespace {

constexpr double kDegenerateTol = 1e-12;

void check_spectrum(const Vector& sv, int r, const char* where) {
  if (sv(0) <= 0.0 || sv(r - 1) <= kDegenerateTol * sv(0)) {
    std::ostringstream ss;
    ss << where << ": input is rank-deficient below " << r;
    throw std::runtime_error(ss.str());
  }
}

void check_row_bound(const Matrix& f, double delta, const char* which) {
  const double bound = std::sqrt(2.0) * delta + 1e-9;
  if (two_to_inf_norm(f) > bound) {
    std::ostringstream ss;
    ss << "hooi: " << which << " violates the sqrt(2) delta row-norm bound";
    throw std::runtime_error(ss.str());
  }
}

// Frobenius distance between the column-space projectors of two orthonormal
// factors, computed without forming the projectors.
double projector_dist(const Matrix& a, const Matrix& b) {
  const double r = double(a.cols());
  const double overlap = (a.transpose() * b).squaredNorm();
  return std::sqrt(std::max(0.0, 2.0 * (r - overlap)));
}

// Slices of the centered tensor multiplied by U on the right: C_l = At_l * U.
std::vector<Matrix> project_slices(const Tensor3& at, const Matrix& u) {
  std::vector<Matrix> c(at.n3());
  for (int l = 0; l < at.n3(); ++l) c[l].noalias() = at.slice(l) * u;
  return c;
}

// Mode-3 unfolding of At x1 U^T x2 U^T: row l = vec(U^T C_l).
Matrix w_step_matrix(const std::vector<Matrix>& c, const Matrix& u) {
  const int L = int(c.size());
  const int ru = int(u.cols());
  Matrix mw(L, ru * ru);
  Matrix block(ru, ru);
  for (int l = 0; l < L; ++l) {
    block.noalias() = u.transpose() * c[l];
    mw.row(l) = Eigen::Map<const Vector>(block.data(), ru * ru);
  }
  return mw;
}

// Mode-1 unfolding of At x2 U^T x3 W^T. Since slices are symmetric,
// At x2 U^T has slices C_l, so block w is sum_l W(l, w) C_l.
Matrix u_step_matrix(const std::vector<Matrix>& c, const Matrix& w) {
  const int n = int(c[0].rows());
  const int ru = int(c[0].cols());
  const int rw = int(w.cols());
  Matrix mu = Matrix::Zero(n, std::size_t(ru) * rw);
  for (int l = 0; l < int(c.size()); ++l)
    for (int k = 0; k < rw; ++k) mu.middleCols(k * ru, ru) += w(l, k) * c[l];
  return mu;
}

FactorPair init_impl(const Tensor3& a, const Tensor3& at, const HooiConfig& cfg) {
  const int n = a.n1();

  // Hollowed sum of squared slices; hollowing removes the degree bias that
  // the diagonal of A^2 accumulates.
  Matrix t = Matrix::Zero(n, n);
  for (int l = 0; l < a.n3(); ++l) {
    auto s = a.slice(l);
    t.noalias() += s * s;
  }
  t.diagonal().setZero();

  Vector sv;
  const Matrix u_raw = svd_left(center_matrix(t), cfg.rank_u, &sv);
  check_spectrum(sv, cfg.rank_u, "init_factors (U step)");
  const Matrix u0 = regularize(u_raw, cfg.delta_u);
  check_row_bound(u0, cfg.delta_u, "U0");

  const Matrix w_raw =
      svd_left(w_step_matrix(project_slices(at, u0), u0), cfg.rank_w, &sv);
  check_spectrum(sv, cfg.rank_w, "init_factors (W step)");
  const Matrix w0 = regularize(w_raw, cfg.delta_w);
  check_row_bound(w0, cfg.delta_w, "W0");

  FactorPair out;
  out.U = u0;
  out.W = w0;
  out.iterations_run = 0;
  return out;
}

FactorPair iterate_impl(const Tensor3& at, const FactorPair& init, const HooiConfig& cfg) {
  FactorPair cur = init;
  cur.iterations_run = 0;
  cur.final_eps = std::numeric_limits<double>::quiet_NaN();

  Matrix prev_u = init.U;  // unregularized iterates start at the inputs
  Matrix prev_w = init.W;
  Vector sv;

  int t = 0;
  double eps = std::numeric_limits<double>::infinity();
  while (t < cfg.n_iter_max && eps > cfg.eps_tol) {
    ++t;
    // Both updates use the factors from iteration t-1.
    const std::vector<Matrix> c = project_slices(at, cur.U);

    const Matrix u_raw = svd_left(u_step_matrix(c, cur.W), cfg.rank_u, &sv);
    check_spectrum(sv, cfg.rank_u, "hooi_iterate (U step)");
    const Matrix w_raw = svd_left(w_step_matrix(c, cur.U), cfg.rank_w, &sv);
    check_spectrum(sv, cfg.rank_w, "hooi_iterate (W step)");

    cur.U = regularize(u_raw, cfg.delta_u);
    check_row_bound(cur.U, cfg.delta_u, "U");
    cur.W = regularize(w_raw, cfg.delta_w);
    check_row_bound(cur.W, cfg.delta_w, "W");

    // Rotation-invariant progress measure on the unregularized iterates.
    eps = projector_dist(u_raw, prev_u) + projector_dist(w_raw, prev_w);
    prev_u = u_raw;
    prev_w = w_raw;

    if (!std::isfinite(eps))
      throw std::runtime_error("hooi_iterate: non-finite progress measure");
  }
  cur.iterations_run = t;
  cur.final_eps = eps;
  return cur;
}

}  // namespace

void HooiConfig::validate(int n, int L) const {
  if (rank_u < 1 || rank_u > n)
    throw std::invalid_argument("HooiConfig: rank_u must be in [1, n]");
  if (rank_w < 1 || rank_w > std::min<long>(L, long(rank_u) * rank_u))
    throw std::invalid_argument("HooiConfig: rank_w must be in [1, min(L, rank_u^2)]");
  if (!(delta_u > 0.0) || !(delta_w > 0.0))
    throw std::invalid_argument("HooiConfig: deltas must be positive");
  if (n_iter_max < 0)
    throw std::invalid_argument("HooiConfig: n_iter_max must be >= 0");
  if (!(eps_tol > 0.0))
    throw std::invalid_argument("HooiConfig: eps_tol must be positive");
}

std::pair<double, double> default_deltas(int n, int L, int M, int K) {
  if (n < 2 || L < 2)
    throw std::invalid_argument("default_deltas: n and L must be >= 2");
  if (M < 1 || K < 1)
    throw std::invalid_argument("default_deltas: M and K must be >= 1");
  const double root_mk = std::sqrt(double(M) * K);
  const double log_n = std::log(double(n));
  return {root_mk / std::sqrt(double(n)) * log_n,
          root_mk / std::sqrt(double(L)) * log_n};
}

int default_rank_u(const std::vector<int>& K, bool sbm_mode) {
  int r = 0;
  for (int km : K) {
    const int k = sbm_mode ? km - 1 : km;
    if (k < 1) throw std::invalid_argument("default_rank_u: K_m too small");
    r += k;
  }
  return r;
}

int default_rank_w(const std::vector<int>& K, bool sbm_mode) {
  int r = 0;
  for (int km : K) {
    const int k = sbm_mode ? km - 1 : km;
    if (k < 1) throw std::invalid_argument("default_rank_w: K_m too small");
    r += k * (k + 1) / 2;
  }
  return r;
}

FactorPair init_factors(const Tensor3& a, const HooiConfig& cfg) {
  if (a.n1() != a.n2())
    throw std::invalid_argument("init_factors: slices must be square");
  cfg.validate(a.n1(), a.n3());
  return init_impl(a, center(a), cfg);
}

FactorPair hooi_iterate(const Tensor3& a, const FactorPair& init, const HooiConfig& cfg) {
  if (a.n1() != a.n2())
    throw std::invalid_argument("hooi_iterate: slices must be square");
  cfg.validate(a.n1(), a.n3());
  if (init.U.rows() != a.n1() || init.U.cols() != cfg.rank_u ||
      init.W.rows() != a.n3() || init.W.cols() != cfg.rank_w)
    throw std::invalid_argument("hooi_iterate: init factors have wrong shape");
  if (cfg.n_iter_max == 0) {
    FactorPair out = init;
    out.iterations_run = 0;
    return out;
  }
  return iterate_impl(center(a), init, cfg);
}

FactorPair estimate_factors(const Tensor3& a, const HooiConfig& cfg) {
  if (a.n1() != a.n2())
    throw std::invalid_argument("estimate_factors: slices must be square");
  cfg.validate(a.n1(), a.n3());
  const Tensor3 at = center(a);
  const FactorPair init = init_impl(a, at, cfg);
  if (cfg.n_iter_max == 0) return init;
  return iterate_impl(at, init, cfg);
}

FactorPair true_factors(const GroundTruth& gt, int rank_w) {
  const int m_groups = gt.labels.M;
  const int n = int(gt.X.at(0).rows());

  // Per-group SVDs of the column-centered latent matrices.
  std::vector<Matrix> u_tilde(m_groups), o_tilde(m_groups);
  std::vector<Vector> d_tilde(m_groups);
  int rank_u = 0, rank_w_default = 0;
  for (int m = 0; m < m_groups; ++m) {
    const Matrix& x = gt.X[m];
    const int km = int(x.cols());
    Matrix xt = x;
    xt.rowwise() -= x.colwise().mean();
    Eigen::JacobiSVD<Matrix> svd(xt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    if (s(0) <= 0.0 || s(km - 1) <= 1e-10 * s(0)) {
      std::ostringstream ss;
      ss << "true_factors: group " << m + 1
         << " has singular sample covariance; reduce K_m by 1";
      throw std::runtime_error(ss.str());
    }
    u_tilde[m] = svd.matrixU();
    d_tilde[m] = s;
    o_tilde[m] = svd.matrixV();
    rank_u += km;
    rank_w_default += km * (km + 1) / 2;
  }
  if (rank_w <= 0) rank_w = rank_w_default;

  Matrix u_bar(n, rank_u);
  std::vector<int> offset(m_groups, 0);
  for (int m = 0, at_col = 0; m < m_groups; ++m) {
    offset[m] = at_col;
    u_bar.middleCols(at_col, u_tilde[m].cols()) = u_tilde[m];
    at_col += int(u_tilde[m].cols());
  }

  Vector sv;
  const Matrix u = svd_left(u_bar, rank_u, &sv);
  if (sv(0) <= 0.0 || sv(rank_u - 1) <= 1e-8 * sv(0))
    throw std::runtime_error("true_factors: concatenated group bases are rank-deficient");

  // Core slices are block-diagonal with the rotated loading matrix of the
  // layer's own group in its block; the mode-3 unfolding factors through W.
  const int L = gt.labels.L();
  Tensor3 g(rank_u, rank_u, L);
  for (int l = 0; l < L; ++l) {
    const int m = gt.labels.s[l] - 1;
    const int km = int(gt.X[m].cols());
    Matrix bt = d_tilde[m].asDiagonal() * o_tilde[m].transpose() * gt.B[l] *
                o_tilde[m] * d_tilde[m].asDiagonal();
    bt = 0.5 * (bt + bt.transpose());
    g.slice(l).block(offset[m], offset[m], km, km) = bt;
  }

  if (rank_w > std::min<long>(L, long(rank_u) * rank_u))
    throw std::runtime_error("true_factors: expected rank of the mode-3 unfolding exceeds its dimensions");
  const Matrix w = svd_left(matricize(g, 3), rank_w, &sv);
  if (sv(0) <= 0.0 || sv(rank_w - 1) <= 1e-8 * sv(0))
    throw std::runtime_error("true_factors: loading matrices do not span the expected rank");

  FactorPair out;
  out.U = u;
  out.W = w;
  out.iterations_run = 0;
  return out;
}

void save_factor_csv(const Matrix& factor, const std::string& name,
                     const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_factor_csv: cannot open " + path);
  os << "# factor " << name << " n=" << factor.rows() << " r=" << factor.cols() << '\n';
  os.precision(17);
  for (Eigen::Index i = 0; i < factor.rows(); ++i) {
    for (Eigen::Index j = 0; j < factor.cols(); ++j) {
      if (j) os << ',';
      os << factor(i, j);
    }
    os << '\n';
  }
}

}  // namespace dimple
