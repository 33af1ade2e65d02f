#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "whatsnet/autodiff.hpp"
#include "whatsnet/encoding.hpp"
#include "whatsnet/eval.hpp"
#include "whatsnet/hypergraph.hpp"
#include "whatsnet/model.hpp"

namespace whatsnet {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;  // hyperedges per step
  std::size_t max_epochs = 100;
  std::size_t patience = 25;
  std::uint64_t seed = 0;  // parameters, batch order, dropout and sampling

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Sampling seed of every evaluation forward pass.
inline constexpr std::uint64_t kEvalSampleSeed = 0;

struct Dataset {
  const Hypergraph& graph;
  const EdgeDependentLabels& labels;
  const ad::Tensor& features;
  const PositionalEncodingTable& pe;

  ModelInputs inputs() const { return {graph, features, pe}; }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's labeled training pairs
  Metrics val;
  double wall_seconds = 0.0;
};

struct TrainReport {
  WhatsNetConfig model_config;
  TrainConfig train_config;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // earliest epoch with the highest validation accuracy
  Metrics best_val;
  std::string checkpoint_path;

  std::string to_json() const;
  /// Equality of everything except wall times.
  bool same_results(const TrainReport& other) const;
};

struct TrainResult {
  WhatsNet model;  // parameters of the best epoch
  TrainReport report;
};

/// Adam on mean cross-entropy over the labeled pairs of each batch of
/// training hyperedges. Stops after max_epochs or once validation accuracy
/// has failed to improve for more than `patience` consecutive epochs.
TrainResult train(const Dataset& data, const Split& split, const WhatsNetConfig& model_config,
                  const TrainConfig& config);

/// Eval-mode predictions for every labeled pair of `edges`.
PredictionSet predict_edges(const WhatsNet& model, const Dataset& data, std::span<const EdgeId> edges);
PredictionSet predict_edges(const WhatsNet& model, const Hypergraph& h, const EmbeddingState& state,
                            const EdgeDependentLabels& labels, std::span<const EdgeId> edges);

struct GridSpec {
  std::vector<double> learning_rates{1e-3, 1e-4};
  std::vector<std::size_t> batch_sizes{64, 128};
};

struct GridResult {
  std::vector<TrainConfig> candidates;  // learning rate major, batch size minor
  std::vector<Metrics> val;             // best-epoch validation metrics per candidate
  std::size_t best_index = 0;
  TrainResult best;
  Metrics test;
};

/// Trains every combination and keeps the one with the highest validation
/// mean(micro-F1, macro-F1); the lowest index wins ties.
GridResult grid_search(const Dataset& data, const Split& split, const WhatsNetConfig& model_config,
                       const TrainConfig& base, const GridSpec& grid);

}  // namespace whatsnet
