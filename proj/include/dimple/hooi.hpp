// Estimation of the orthonormal factor pair (U, W) of the centered tensor:
// spectral initialization from the hollowed sum of squared slices, followed
// by regularized orthogonal power iterations.
#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "dimple/netgen.hpp"
#include "dimple/tensor.hpp"

namespace dimple {

struct HooiConfig {
  int rank_u = 0;          // columns of U (sum of group ambient dims)
  int rank_w = 0;          // columns of W (rank of the mode-3 core unfolding)
  double delta_u = 0.0;    // row-norm caps for the regularizer
  double delta_w = 0.0;
  int n_iter_max = 50;
  double eps_tol = 1e-8;

  void validate(int n, int L) const;  // throws std::invalid_argument
};

struct FactorPair {
  Matrix U;  // n x rank_u, orthonormal columns
  Matrix W;  // L x rank_w, orthonormal columns
  int iterations_run = 0;
  double final_eps = std::numeric_limits<double>::quiet_NaN();
};

// delta_u = sqrt(M K / n) log n, delta_w = sqrt(M K / L) log n (natural log).
std::pair<double, double> default_deltas(int n, int L, int M, int K);

// Sum of group ambient dimensions; the sbm flag reduces every K_m by 1.
int default_rank_u(const std::vector<int>& K, bool sbm_mode = false);

// Sum over groups of K_m (K_m + 1) / 2; the sbm flag reduces every K_m by 1.
int default_rank_w(const std::vector<int>& K, bool sbm_mode = false);

// Spectral initialization: U0 from the leading eigenvectors of the doubly
// centered hollowed sum of squared slices, W0 from the mode-3 unfolding of
// the centered tensor projected onto U0; both row-regularized.
FactorPair init_factors(const Tensor3& a, const HooiConfig& cfg);

// Alternating truncated SVD updates with row regularization after each step.
// Both per-iteration updates use the factors from the previous iteration.
// Stops after n_iter_max iterations or when the Frobenius projector distance
// between consecutive unregularized factors drops below eps_tol.
FactorPair hooi_iterate(const Tensor3& a, const FactorPair& init, const HooiConfig& cfg);

// init_factors + hooi_iterate with the centered tensor computed once.
FactorPair estimate_factors(const Tensor3& a, const HooiConfig& cfg);

// Population factors of a generated instance, used as test oracles and metric
// references. rank_w <= 0 selects the default sum over groups of
// K_m (K_m + 1) / 2; instances with lower loading variability (e.g. one
// loading matrix per group) must pass their actual mode-3 rank. Throws when a
// per-group sample covariance is singular (the ambient dimension of the group
// must be reduced by one).
FactorPair true_factors(const GroundTruth& gt, int rank_w = 0);

// Dense CSV with the one-line header "# factor <name> n=<rows> r=<cols>".
void save_factor_csv(const Matrix& factor, const std::string& name,
                     const std::string& path);

}  // namespace dimple
