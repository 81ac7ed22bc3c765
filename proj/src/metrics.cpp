#include "dimple/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dimple/linalg.hpp"

namespace dimple {

namespace detail {

std::pair<std::vector<int>, long> best_match_exhaustive(const Matrix& confusion) {
  const int m = int(confusion.rows());
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm = perm;
  double best = -1.0;
  do {
    double matched = 0.0;
    for (int e = 0; e < m; ++e) matched += confusion(perm[e], e);
    if (matched > best) {
      best = matched;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& v : best_perm) ++v;  // report 1-based labels
  return {best_perm, long(best + 0.5)};
}

// Jonker-Volgenant style shortest augmenting path assignment (minimization);
// maximization is run on negated counts.
std::pair<std::vector<int>, long> best_match_hungarian(const Matrix& confusion) {
  const int m = int(confusion.rows());
  Matrix cost = -confusion;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= m; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j)
        if (!used[j]) {
          const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> perm(m, 0);
  double matched = 0.0;
  for (int j = 1; j <= m; ++j) {
    perm[j - 1] = p[j];  // estimated label j matched to true label p[j]
    matched += confusion(p[j] - 1, j - 1);
  }
  return {perm, long(matched + 0.5)};
}

}  // namespace detail

ErrorReport misclassification_rate(const LayerLabels& s_hat, const LayerLabels& s, int M) {
  const int L = s.L();
  if (s_hat.L() != L)
    throw std::invalid_argument("misclassification_rate: label vectors differ in length");
  if (L < 1) throw std::invalid_argument("misclassification_rate: empty labels");
  if (M < 1) throw std::invalid_argument("misclassification_rate: M must be >= 1");
  Matrix confusion = Matrix::Zero(M, M);
  for (int l = 0; l < L; ++l) {
    const int t = s.s[l], e = s_hat.s[l];
    if (t < 1 || t > M || e < 1 || e > M)
      throw std::invalid_argument("misclassification_rate: label out of range");
    confusion(t - 1, e - 1) += 1.0;
  }
  const auto [perm, matched] = M <= 8 ? detail::best_match_exhaustive(confusion)
                                      : detail::best_match_hungarian(confusion);
  ErrorReport rep;
  rep.permutation = perm;
  rep.mismatches = L - int(matched);
  rep.r_bl = double(rep.mismatches) / L;
  return rep;
}

bool is_perfect(const LayerLabels& s_hat, const LayerLabels& s, int M) {
  return misclassification_rate(s_hat, s, M).mismatches == 0;
}

std::pair<double, double> subspace_errors(const FactorPair& truth, const FactorPair& est) {
  return {sin_theta(truth.U, est.U).spectral, sin_theta(truth.W, est.W).spectral};
}

}  // namespace dimple
