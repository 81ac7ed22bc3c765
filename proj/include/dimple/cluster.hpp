// Between-layer clustering: thresholding of the W-row Gram matrix followed by
// spectral k-means, the per-layer projector-overlap baseline, and the shared
// k-means engine.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dimple/netgen.hpp"
#include "dimple/rng.hpp"
#include "dimple/tensor.hpp"

namespace dimple {

// Separation uses T = M / (2L), half the within-group separation scale of the
// score matrix; it is the default because the adaptive gap rule breaks down
// when the within-group scores spread continuously toward zero, which is what
// per-layer random loading matrices produce.
enum class ThresholdMode { FormulaT, GapAdaptive, Manual, Separation };

struct ClusterConfig {
  int M = 0;
  ThresholdMode mode = ThresholdMode::Separation;
  double manual_t = 0.0;      // used when mode == Manual; must be >= 0
  double kmeans_eps = 0.01;   // nominal (1+eps) approximation target
  int kmeans_restarts = 20;
  int kmeans_iters = 100;
  std::uint64_t seed = 0;     // k-means seeding stream
};

struct ClusteringResult {
  LayerLabels labels;
  Matrix score;                       // Y-hat (tensor path) or Theta-hat (baseline)
  std::optional<double> threshold;    // empty for the baseline
};

// Y(l1, l2) = <W(l1,:), W(l2,:)>, i.e. W W^T.
Matrix gram_rows(const Matrix& w);

// T = (M / L) * R(n, L) with unit leading constants, natural logarithms and
// the observed edge density standing in for the sparsity factor; clamped at 0.
double formula_threshold(int n, int L, int M, int K, double rho_hat);

// Midpoint of the largest consecutive gap of the sorted |off-diagonal| score
// values. Ties break toward the largest-value gap. Throws when all values
// coincide (no gap to split).
double gap_threshold(const Matrix& y);
double gap_threshold_values(std::vector<double> values);

struct ClusterContext {
  int n = 0, L = 0, M = 0, K = 0;
  double rho_hat = 0.0;  // only consulted by FormulaT
};

// Algorithm: binarize |Y| > T (diagonal included), take the M leading left
// singular vectors of the indicator matrix, k-means its rows.
ClusteringResult cluster_tensor(const Matrix& w, const ClusterConfig& cfg,
                                const ClusterContext& ctx);

// Layer-per-layer baseline: per-layer rank-K^(l) eigenbasis of the centered
// slice; overlap Theta(l1, l2) = ||U_l1^T U_l2||_F^2 (identical to the scalar
// product of the vectorized projectors); spectral k-means on Theta.
ClusteringResult cluster_baseline(const Tensor3& a, const std::vector<int>& k_per_layer,
                                  int M, const ClusterConfig& cfg);

struct KmeansResult {
  std::vector<int> labels;  // 0-based cluster indices
  double objective = 0.0;   // within-cluster sum of squared distances
};

// k-means++ seeding, Lloyd iterations, best of cfg.kmeans_restarts restarts.
// Empty clusters are repaired by reseeding them at the point farthest from
// its centroid. Deterministic given the rng stream.
KmeansResult kmeans(const Matrix& points, int k, const ClusterConfig& cfg, Rng& rng);

namespace detail {
// One Lloyd run from given centroids; exposed for objective-trace tests.
KmeansResult lloyd(const Matrix& points, int k, Matrix centroids, int max_iters,
                   std::vector<double>* objective_trace = nullptr);
}  // namespace detail

}  // namespace dimple
