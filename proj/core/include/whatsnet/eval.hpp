#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "whatsnet/hypergraph.hpp"

namespace whatsnet {

struct PairPrediction {
  NodeId node = 0;
  EdgeId edge = 0;
  int truth = 0;
  int predicted = 0;
};

/// Predictions over unique (node, hyperedge) pairs.
using PredictionSet = std::vector<PairPrediction>;

/// Overall accuracy. Throws on empty input.
double micro_f1(const PredictionSet& preds);
/// Unweighted mean of per-class F1 over classes that occur as a true or a
/// predicted label. Throws on empty input.
double macro_f1(const PredictionSet& preds);

/// Base-2 Jensen-Shannon divergence between two distributions of equal length.
double jensen_shannon(std::span<const double> p, std::span<const double> q);

/// Per node, JSD between the empirical distributions of its true and of its
/// predicted labels; averaged over the nodes present in `preds`.
double jsd_node_label_distributions(const PredictionSet& preds, int num_classes);

struct Metrics {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double avg_jsd = 0.0;

  double selection_score() const { return 0.5 * (micro_f1 + macro_f1); }
};

Metrics evaluate(const PredictionSet& preds, int num_classes);

/// Labeled pairs of `edges` in edge order, member order within each edge,
/// with `predicted` left at 0.
PredictionSet truth_pairs(const Hypergraph& h, const EdgeDependentLabels& labels, std::span<const EdgeId> edges);

/// Independent uniform draws over [0, C) per pair.
PredictionSet baseline_uniform(PredictionSet pairs, int num_classes, std::uint64_t seed);
/// Independent draws per pair from `frequencies`, which must sum to 1.
PredictionSet baseline_proportional(PredictionSet pairs, std::span<const double> frequencies, std::uint64_t seed);

/// Relative class frequencies among the labeled pairs of `edges`.
std::vector<double> label_frequencies(const Hypergraph& h, const EdgeDependentLabels& labels,
                                      std::span<const EdgeId> edges);

}  // namespace whatsnet
