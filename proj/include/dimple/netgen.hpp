// Ground-truth generation for diverse multiplex signed networks: layer group
// labels, latent position matrices, symmetric loading matrices, the signed
// probability tensor P and Bernoulli-sampled signed adjacency tensors.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dimple/rng.hpp"
#include "dimple/tensor.hpp"

namespace dimple {

enum class LatentDist { TruncatedNormal, MultinomialFirstK, DirichletFirstK };

struct LatentSpec {
  LatentDist kind = LatentDist::TruncatedNormal;
  double sigma = 1.0;            // TruncatedNormal with isotropic covariance
  Matrix cov;                    // optional general covariance; empty = sigma^2 I
  std::vector<double> weights;   // MultinomialFirstK: K+1 category probabilities
  std::vector<double> alpha;     // DirichletFirstK: K+1 concentration parameters
};

struct ModelConfig {
  int n = 0;                 // nodes
  int L = 0;                 // layers
  int M = 0;                 // layer groups
  std::vector<int> K;        // ambient dimension per group, size M
  std::vector<double> pi;    // group probabilities, size M; empty = uniform
  LatentSpec latent;
  double b_min = 0.0, b_max = 0.0;  // uniform range (c, d) for loading entries
  std::uint64_t seed = 0;

  void validate() const;     // throws std::invalid_argument
  int max_k() const;
};

struct LayerLabels {
  std::vector<int> s;  // values in 1..M
  int M = 0;
  int L() const { return int(s.size()); }
};

struct GroundTruth {
  Tensor3 P;               // n x n x L, hollow diagonal, |entries| <= 1
  LayerLabels labels;
  std::vector<Matrix> X;   // per group, n x K_m, rows in the closed unit ball
  std::vector<Matrix> B;   // per layer, symmetric K_m x K_m
};

// i.i.d. multinomial labels over 1..M.
LayerLabels sample_labels(const std::vector<double>& pi, int L, Rng& rng);

// n i.i.d. rows from the chosen latent distribution; every row lies in the
// closed unit ball of R^K. TruncatedNormal rows have norm exactly 1;
// MultinomialFirstK rows are 0/1 with at most one 1; DirichletFirstK rows are
// nonnegative with sum <= 1.
Matrix sample_latent(const LatentSpec& spec, int n, int K, Rng& rng);

// Symmetric K x K with upper-triangular entries (diagonal included) i.i.d.
// Uniform(c, d); c == d yields the constant matrix, c > d throws.
Matrix sample_loading(int K, double c, double d, Rng& rng);

// Assembles labels, X's, B's and P with P slice = X B X^T, hollowed diagonal.
// Throws if any off-diagonal |P| exceeds 1 (never clips).
GroundTruth build_ground_truth(const ModelConfig& cfg);

// Probability slices X B X^T with the diagonal kept. Centering this tensor
// yields the exact low-rank tensor the estimators target; the stored gt.P
// differs from it by the hollowed diagonal (self-loops are never sampled).
Tensor3 population_probability(const GroundTruth& gt);

// Independent signed Bernoulli edges: |A| = 1 with probability |P|,
// sign(A) = sign(P), symmetric slices, zero diagonal. One RNG substream per
// layer, so results do not depend on evaluation order.
Tensor3 sample_adjacency(const Tensor3& p, std::uint64_t seed);

// Mean edge density 2 * sum_{l, i<j} |A(i,j,l)| / (n (n-1) L), in [0, 1].
double estimate_sparsity(const Tensor3& a);

// CSV "layer,group" with a header line.
void save_labels_csv(const LayerLabels& labels, const std::string& path);
LayerLabels load_labels_csv(const std::string& path, int M);

// Dense binary dump: 8-byte magic "DMPLPT01", three uint64 dims, then
// n1*n2*n3 little-endian doubles in storage order.
void save_prob_dump(const Tensor3& p, const std::string& path);
Tensor3 load_prob_dump(const std::string& path);

}  // namespace dimple
