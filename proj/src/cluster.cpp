#include "dimple/cluster.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dimple/linalg.hpp"

namespace dimple {

Matrix gram_rows(const Matrix& w) { return w * w.transpose(); }

double formula_threshold(int n, int L, int M, int K, double rho_hat) {
  if (n < 2 || L < 2)
    throw std::invalid_argument("formula_threshold: n and L must be >= 2");
  if (M < 1 || K < 1)
    throw std::invalid_argument("formula_threshold: M and K must be >= 1");
  if (!(rho_hat > 0.0) || rho_hat > 1.0)
    throw std::invalid_argument("formula_threshold: rho_hat must be in (0, 1]");
  const double km = double(K) * M;
  const double log_n = std::log(double(n));
  const double loglog_n = std::log(log_n);
  const double r1 = std::pow(km, 1.5) * std::pow(log_n, 4.0) * loglog_n /
                    std::sqrt(rho_hat * n * std::min(n, L));
  const double r2 = km * std::pow(log_n, 1.5) * std::sqrt(loglog_n) / std::sqrt(double(n));
  return std::max(0.0, double(M) / L * (r1 + r2));
}

double gap_threshold_values(std::vector<double> values) {
  if (values.size() < 2)
    throw std::invalid_argument("gap_threshold: need at least two values");
  for (auto& v : values) v = std::abs(v);
  std::sort(values.begin(), values.end(), std::greater<double>());
  double best_gap = 0.0;
  std::size_t best_at = 0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double gap = values[i] - values[i + 1];
    if (gap > best_gap) {  // strict: ties keep the earliest (largest-value) gap
      best_gap = gap;
      best_at = i;
    }
  }
  if (best_gap == 0.0)
    throw std::runtime_error("gap_threshold: all values are equal, separation is indeterminate");
  return 0.5 * (values[best_at] + values[best_at + 1]);
}

double gap_threshold(const Matrix& y) {
  const int L = int(y.rows());
  if (L < 2 || y.cols() != L)
    throw std::invalid_argument("gap_threshold: score matrix must be square with L >= 2");
  std::vector<double> vals;
  vals.reserve(std::size_t(L) * (L - 1) / 2);
  for (int l2 = 1; l2 < L; ++l2)
    for (int l1 = 0; l1 < l2; ++l1) vals.push_back(y(l1, l2));
  return gap_threshold_values(std::move(vals));
}

namespace {

LayerLabels spectral_kmeans(const Matrix& score, const ClusterConfig& cfg) {
  const int L = int(score.rows());
  const Matrix v = svd_left(score, cfg.M);
  Rng rng(cfg.seed, {0x6b6d65616e73ULL});
  const KmeansResult km = kmeans(v, cfg.M, cfg, rng);
  LayerLabels labels;
  labels.M = cfg.M;
  labels.s.resize(L);
  for (int l = 0; l < L; ++l) labels.s[l] = km.labels[l] + 1;
  return labels;
}

}  // namespace

ClusteringResult cluster_tensor(const Matrix& w, const ClusterConfig& cfg,
                                const ClusterContext& ctx) {
  const int L = int(w.rows());
  if (cfg.M < 1) throw std::invalid_argument("cluster_tensor: M must be >= 1");
  if (cfg.M > L) throw std::invalid_argument("cluster_tensor: M exceeds the number of layers");
  Matrix y = gram_rows(w);
  double t = 0.0;
  switch (cfg.mode) {
    case ThresholdMode::FormulaT:
      t = formula_threshold(ctx.n, ctx.L, ctx.M, ctx.K, ctx.rho_hat);
      break;
    case ThresholdMode::GapAdaptive:
      t = gap_threshold(y);
      break;
    case ThresholdMode::Manual:
      if (cfg.manual_t < 0.0)
        throw std::invalid_argument("cluster_tensor: manual threshold must be >= 0");
      t = cfg.manual_t;
      break;
    case ThresholdMode::Separation:
      t = 0.5 * double(cfg.M) / L;
      break;
  }
  Matrix x(L, L);
  for (int j = 0; j < L; ++j)
    for (int i = 0; i < L; ++i) x(i, j) = std::abs(y(i, j)) > t ? 1.0 : 0.0;

  ClusteringResult res;
  res.labels = spectral_kmeans(x, cfg);
  res.score = std::move(y);
  res.threshold = t;
  return res;
}

ClusteringResult cluster_baseline(const Tensor3& a, const std::vector<int>& k_per_layer,
                                  int M, const ClusterConfig& cfg) {
  const int n = a.n1();
  const int L = a.n3();
  if (a.n2() != n)
    throw std::invalid_argument("cluster_baseline: slices must be square");
  if (int(k_per_layer.size()) != L)
    throw std::invalid_argument("cluster_baseline: need one ambient dimension per layer");
  for (int kl : k_per_layer)
    if (kl < 1 || kl > n)
      throw std::invalid_argument("cluster_baseline: ambient dimensions must be in [1, n]");
  if (M < 1 || M > L)
    throw std::invalid_argument("cluster_baseline: M must be in [1, L]");

  const Tensor3 at = center(a);

  // Per-layer leading eigenbasis, ordered by |eigenvalue| (slices are
  // symmetric, so these are the leading left singular vectors).
  std::vector<Matrix> bases(L);
  for (int l = 0; l < L; ++l) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(at.slice(l));
    if (es.info() != Eigen::Success)
      throw std::runtime_error("cluster_baseline: eigendecomposition failed");
    const int kl = k_per_layer[l];
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      const double ai = std::abs(es.eigenvalues()(i));
      const double aj = std::abs(es.eigenvalues()(j));
      return ai > aj || (ai == aj && i < j);
    });
    const double top = std::abs(es.eigenvalues()(order[0]));
    if (top <= 0.0 || std::abs(es.eigenvalues()(order[kl - 1])) <= 1e-12 * top)
      throw std::runtime_error("cluster_baseline: layer slice is rank-deficient below its ambient dimension");
    Matrix u(n, kl);
    for (int k = 0; k < kl; ++k) u.col(k) = es.eigenvectors().col(order[k]);
    bases[l] = std::move(u);
  }

  // <vec(P_l1), vec(P_l2)> for projectors P_l = U_l U_l^T collapses to the
  // squared Frobenius norm of the basis overlap; no n^2 vectors needed.
  Matrix theta(L, L);
  for (int l1 = 0; l1 < L; ++l1)
    for (int l2 = l1; l2 < L; ++l2) {
      const double v = (bases[l1].transpose() * bases[l2]).squaredNorm();
      theta(l1, l2) = v;
      theta(l2, l1) = v;
    }

  ClusteringResult res;
  res.labels = spectral_kmeans(theta, cfg);
  res.score = std::move(theta);
  res.threshold = std::nullopt;
  return res;
}

namespace detail {

KmeansResult lloyd(const Matrix& points, int k, Matrix centroids, int max_iters,
                   std::vector<double>* objective_trace) {
  const int n = int(points.rows());
  std::vector<int> labels(n, 0);
  KmeansResult out;
  if (objective_trace) objective_trace->clear();

  auto assign = [&]() {
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      labels[i] = arg;
      obj += best;
    }
    return obj;
  };

  double obj = assign();
  if (objective_trace) objective_trace->push_back(obj);
  for (int it = 0; it < max_iters; ++it) {
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(labels[i]) += points.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / counts[c];
      } else {
        // Reseed the empty cluster at the point farthest from its centroid.
        double far_d = -1.0;
        int far_i = 0;
        for (int i = 0; i < n; ++i) {
          const double d = (points.row(i) - centroids.row(labels[i])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        centroids.row(c) = points.row(far_i);
      }
    }
    const std::vector<int> prev = labels;
    const double new_obj = assign();
    if (objective_trace) objective_trace->push_back(new_obj);
    obj = new_obj;
    if (prev == labels) break;
  }
  out.labels = std::move(labels);
  out.objective = obj;
  return out;
}

}  // namespace detail

KmeansResult kmeans(const Matrix& points, int k, const ClusterConfig& cfg, Rng& rng) {
  const int n = int(points.rows());
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans: k exceeds the number of points");

  KmeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, cfg.kmeans_restarts);
  for (int s = 0; s < restarts; ++s) {
    // k-means++ seeding.
    Matrix centroids(k, points.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    int first = int(rng.uniform01() * n);
    if (first >= n) first = n - 1;
    centroids.row(0) = points.row(first);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = (points.row(i) - centroids.row(c - 1)).squaredNorm();
        d2[i] = std::min(d2[i], d);
        total += d2[i];
      }
      int pick = -1;
      if (total > 0.0) {
        const double target = rng.uniform01() * total;
        double cum = 0.0;
        for (int i = 0; i < n; ++i) {
          cum += d2[i];
          if (target < cum) {
            pick = i;
            break;
          }
        }
      }
      if (pick < 0) {
        // All remaining distances are zero (duplicate points); take the first
        // point not already chosen as a centroid.
        for (int i = 0; i < n && pick < 0; ++i) {
          bool used = false;
          for (int c2 = 0; c2 < c; ++c2)
            if ((points.row(i) - centroids.row(c2)).squaredNorm() == 0.0) used = true;
          if (!used) pick = i;
        }
        if (pick < 0) pick = 0;
      }
      centroids.row(c) = points.row(pick);
    }
    KmeansResult run = detail::lloyd(points, k, std::move(centroids), cfg.kmeans_iters);
    if (run.objective < best.objective) best = std::move(run);
  }
  return best;
}

}  // namespace dimple
