#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "whatsnet/hypergraph.hpp"

namespace whatsnet {

/// γ_e(v) per membership pair, indexed by PairId; all entries positive.
struct EdgeDependentWeights {
  std::vector<double> pair_weights;
};

using LabelWeightMap = std::map<int, double>;

/// Parses "label:weight,label:weight,...". Throws on malformed input,
/// duplicate labels or non-positive weights.
LabelWeightMap parse_weight_map(const std::string& text);

/// γ_e(v) = map[y_{v,e}] for every pair. Throws when a pair is unlabeled or
/// its label is missing from the map.
EdgeDependentWeights labels_to_weights(const Hypergraph& h, std::span<const int> pair_labels,
                                       const LabelWeightMap& map);

struct RankingOptions {
  double alpha = 0.0;  // uniform restart probability
  double tol = 1e-13;  // L1 change between iterates
  std::size_t max_iter = 100000;
};

struct RankingResult {
  std::vector<double> stationary;  // sums to 1; 0 on isolated nodes
  std::vector<NodeId> ranking;     // by stationary descending, ties by id
  double alpha = 0.0;              // restart actually used
  bool restart_forced = false;
  std::size_t iterations = 0;
};

/// Dense row-stochastic transition matrix (row-major N x N) of the walk that
/// picks e in N_v uniformly, then u in e with probability γ_e(u)/Σ_w γ_e(w).
/// Rows of isolated nodes are zero.
std::vector<double> transition_matrix(const Hypergraph& h, const EdgeDependentWeights& weights);

/// Power iteration on the walk above, restarting uniformly over non-isolated
/// nodes with probability alpha. A reducible chain with alpha = 0 gets a
/// warning on stderr and alpha = 0.05.
RankingResult stationary(const Hypergraph& h, const EdgeDependentWeights& weights, const RankingOptions& options = {});

/// Fraction of node pairs with distinct ground-truth scores that `scores`
/// orders the same way; pairs tied in `scores` count 0.5.
double pairwise_accuracy(std::span<const double> scores, std::span<const double> ground_truth);

}  // namespace whatsnet
