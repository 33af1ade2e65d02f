#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "whatsnet/attention.hpp"
#include "whatsnet/autodiff.hpp"
#include "whatsnet/encoding.hpp"
#include "whatsnet/hypergraph.hpp"

namespace whatsnet {

enum class ClassifierInput {
  kConcat,        // ψ([X_v ‖ H_e]) on final embeddings
  kIntermediate,  // ψ(Ṽ_e[v]) on the last layer's edge-dependent node embeddings
};

struct WhatsNetConfig {
  std::size_t num_layers = 1;
  std::size_t input_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t final_dim = 128;
  std::size_t heads = 4;
  std::size_t inducing_points = 4;
  std::size_t att_stack = 2;
  double dropout = 0.7;
  int num_classes = 3;
  // Incident hyperedges sampled per node in hyperedge-to-node passing; 0 = all.
  std::size_t sample_size = 0;
  bool use_pe = true;
  bool use_within_att = true;
  ClassifierInput classifier = ClassifierInput::kConcat;

  /// Embedding width after layer l; layer 0 is the input features.
  std::size_t width(std::size_t layer) const;
  bool layer_uses_pe(std::size_t layer) const;
  void validate() const;

  friend bool operator==(const WhatsNetConfig&, const WhatsNetConfig&) = default;
};

/// Inputs shared by every forward pass of one dataset.
struct ModelInputs {
  const Hypergraph& graph;
  const ad::Tensor& features;  // N x input_dim
  const PositionalEncodingTable& pe;
};

/// Which rows each layer must produce. nodes[l] / edges[l] hold the ids whose
/// X^(l) / H^(l) are computed, sorted ascending; index 0 is the input layer.
struct ForwardPlan {
  std::vector<std::vector<NodeId>> nodes;
  std::vector<std::vector<EdgeId>> edges;
  // Ñ_v as membership pairs, for every node that runs a node update.
  std::vector<std::vector<PairId>> node_pairs;

  /// Every node and hyperedge at every layer.
  static ForwardPlan full(const Hypergraph& h, const WhatsNetConfig& config, std::uint64_t sample_seed);
  /// Receptive field of the given membership pairs.
  static ForwardPlan for_pairs(const Hypergraph& h, const WhatsNetConfig& config, std::span<const PairId> pairs,
                               std::uint64_t sample_seed);
};

/// Ñ_v: all incident pairs when sample_size is 0 or >= |N_v|, otherwise a
/// uniform subset without replacement drawn from a generator seeded by
/// (sample_seed, v). Returned in increasing hyperedge id.
std::vector<PairId> sample_incident_pairs(const Hypergraph& h, NodeId v, std::size_t sample_size,
                                          std::uint64_t sample_seed);

/// Embeddings of one layer on the tape; node_row[v] / edge_row[e] give the
/// row of v / e or -1 when not computed.
struct LayerState {
  ad::Var x;
  ad::Var h;
  std::vector<std::int32_t> node_row;
  std::vector<std::int32_t> edge_row;
  // Ṽ_e rows of the hyperedge update, addressed through pair_row.
  std::optional<ad::Var> intermediate;
  std::vector<std::int32_t> pair_row;
};

/// Eval-mode embeddings of the whole hypergraph.
struct EmbeddingState {
  ad::Tensor x;             // N x d_L
  ad::Tensor h;             // M x d_L
  ad::Tensor intermediate;  // Σ|e| x d_L, row per PairId
};

struct Prediction {
  int label = 0;
  std::vector<double> logits;
};

/// Lowest index wins ties.
int argmax(std::span<const double> values);

/// H^(0)_e = mean of the member rows of `features`.
ad::Tensor init_hyperedge_embeddings(const Hypergraph& h, const ad::Tensor& features);

class WhatsNet {
 public:
  /// Xavier-initialized parameters, deterministic per seed.
  WhatsNet(WhatsNetConfig config, std::uint64_t seed);
  /// Adopts `params` after checking every expected name and shape.
  WhatsNet(WhatsNetConfig config, ad::ParamStore params);

  const WhatsNetConfig& config() const { return config_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  /// Layer-0 state restricted to plan.nodes[0] / plan.edges[0].
  LayerState input_state(ad::Tape& tape, const ModelInputs& in, const ForwardPlan& plan) const;

  /// Hyperedge half of layer l: H^(l) for plan.edges[l]. `prev`
  /// must already be lifted to width(l).
  LayerState update_hyperedges(ForwardContext& ctx, std::size_t layer, const ModelInputs& in, const LayerState& prev,
                               const ForwardPlan& plan) const;
  /// Node half of layer l: X^(l) for plan.nodes[l]; nodes without
  /// sampled hyperedges keep their previous embedding.
  void update_nodes(ForwardContext& ctx, std::size_t layer, const ModelInputs& in, const LayerState& prev,
                    LayerState& next, const ForwardPlan& plan) const;

  /// L alternations of hyperedge then node updates.
  LayerState forward(ForwardContext& ctx, const ModelInputs& in, const ForwardPlan& plan) const;

  /// Classifier logits (one row per pair) in the configured classifier mode.
  ad::Var pair_logits(ForwardContext& ctx, const ModelInputs& in, const LayerState& state,
                      std::span<const PairId> pairs) const;

  /// Full-graph eval-mode forward.
  EmbeddingState embed(const ModelInputs& in, std::uint64_t sample_seed) const;

  /// ψ([X_v ‖ H_e]). Throws when v is not in e.
  Prediction classify(const Hypergraph& h, NodeId v, EdgeId e, const EmbeddingState& state) const;
  /// ψ(Ṽ_e^(L)[v]). Throws unless the model runs in intermediate mode.
  Prediction classify_intermediate(const Hypergraph& h, NodeId v, EdgeId e, const EmbeddingState& state) const;
  /// Prediction for a pair in the configured classifier mode.
  Prediction predict_pair(const Hypergraph& h, PairId p, const EmbeddingState& state) const;

 private:
  void register_params(std::uint64_t seed);
  ad::Var lift(ForwardContext& ctx, const std::string& name, ad::Var x) const;

  WhatsNetConfig config_;
  ad::ParamStore params_;
};

std::string layer_prefix(std::size_t layer);

/// Checkpoint: versioned JSON with config, centrality column order, every
/// parameter (shape + row-major data) and caller metadata.
void save_checkpoint(const std::filesystem::path& path, const WhatsNet& model, const std::string& metadata_json);

struct Checkpoint {
  WhatsNetConfig config;
  ad::ParamStore params;
  std::string metadata_json;
};

/// Throws on a version or centrality-order mismatch, or any shape that does
/// not match the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

inline constexpr int kCheckpointFormatVersion = 1;

}  // namespace whatsnet
