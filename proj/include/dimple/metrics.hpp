// Error measures: permutation-minimized layer misclassification rate and
// subspace distances between estimated and reference factor pairs.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dimple/hooi.hpp"
#include "dimple/netgen.hpp"

namespace dimple {

struct ErrorReport {
  double r_bl = 0.0;              // mismatches / L
  int mismatches = 0;
  std::vector<int> permutation;   // permutation[e-1] = true label matched to estimated label e
  std::optional<double> sin_theta_u;
  std::optional<double> sin_theta_w;
};

// (2L)^-1 min over label permutations of the squared Frobenius distance of
// the one-hot clustering matrices; equals (#mismatched layers) / L.
// Exhaustive search over the M! permutations for M <= 8, Hungarian assignment
// on the confusion matrix otherwise.
ErrorReport misclassification_rate(const LayerLabels& s_hat, const LayerLabels& s, int M);

bool is_perfect(const LayerLabels& s_hat, const LayerLabels& s, int M);

// Spectral sin-theta distances (U first, W second).
std::pair<double, double> subspace_errors(const FactorPair& truth, const FactorPair& est);

namespace detail {
// Both return (permutation, matched count) maximizing the trace of
// C(perm[e]-1, e) over the M x M confusion matrix C(true, estimated).
std::pair<std::vector<int>, long> best_match_exhaustive(const Matrix& confusion);
std::pair<std::vector<int>, long> best_match_hungarian(const Matrix& confusion);
}  // namespace detail

}  // namespace dimple
