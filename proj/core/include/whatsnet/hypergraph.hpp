#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace whatsnet {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
// Index of a (node, hyperedge) membership; pairs of hyperedge e are the
// contiguous range [pair_offset(e), pair_offset(e) + |e|) in member order.
using PairId = std::int32_t;

/// Immutable hypergraph in CSR form, holding both the member lists of every
/// hyperedge and the incident hyperedges N_v of every node.
class Hypergraph {
 public:
  Hypergraph() = default;
  /// Validates and indexes `edges`. Throws whatsnet::Error on an empty
  /// hyperedge, a node id outside [0, num_nodes) or a duplicate member.
  Hypergraph(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& edges);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edge_offsets_.size() - 1; }
  // Σ_e |e| = Σ_v |N_v|.
  std::size_t total_size() const { return members_.size(); }

  std::span<const NodeId> edge(EdgeId e) const {
    return {members_.data() + edge_offsets_[e], members_.data() + edge_offsets_[e + 1]};
  }
  std::size_t edge_size(EdgeId e) const { return edge_offsets_[e + 1] - edge_offsets_[e]; }
  PairId pair_offset(EdgeId e) const { return static_cast<PairId>(edge_offsets_[e]); }

  // N_v in increasing hyperedge id.
  std::span<const EdgeId> incident(NodeId v) const {
    return {incident_edges_.data() + node_offsets_[v], incident_edges_.data() + node_offsets_[v + 1]};
  }
  // The membership pairs of v, parallel to incident(v).
  std::span<const PairId> incident_pairs(NodeId v) const {
    return {incident_pairs_.data() + node_offsets_[v], incident_pairs_.data() + node_offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return node_offsets_[v + 1] - node_offsets_[v]; }

  NodeId pair_node(PairId p) const { return members_[p]; }
  EdgeId pair_edge(PairId p) const { return pair_edges_[p]; }

  std::vector<std::vector<NodeId>> edge_lists() const;

  friend bool operator==(const Hypergraph& a, const Hypergraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edge_offsets_ == b.edge_offsets_ && a.members_ == b.members_;
  }

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> edge_offsets_{0};
  std::vector<NodeId> members_;
  std::vector<EdgeId> pair_edges_;
  std::vector<std::size_t> node_offsets_{0};
  std::vector<EdgeId> incident_edges_;
  std::vector<PairId> incident_pairs_;
};

/// Labels y_{v,e} stored per membership pair; hyperedges may be unlabeled.
class EdgeDependentLabels {
 public:
  static constexpr int kUnlabeled = -1;

  EdgeDependentLabels() = default;
  /// `per_edge[e]` is empty for an unlabeled hyperedge, otherwise parallel to
  /// the member list of e. Throws on a size mismatch or a label >= num_classes.
  EdgeDependentLabels(const Hypergraph& h, int num_classes, const std::vector<std::vector<int>>& per_edge);

  int num_classes() const { return num_classes_; }
  bool is_labeled(EdgeId e) const { return labeled_[e] != 0; }
  int label(PairId p) const { return pair_labels_[p]; }
  const std::vector<int>& pair_labels() const { return pair_labels_; }
  std::vector<EdgeId> labeled_edges() const;

  friend bool operator==(const EdgeDependentLabels&, const EdgeDependentLabels&) = default;

 private:
  int num_classes_ = 0;
  std::vector<int> pair_labels_;
  std::vector<char> labeled_;
};

struct Split {
  std::vector<EdgeId> train;
  std::vector<EdgeId> val;
  std::vector<EdgeId> test;
};

Hypergraph load_hypergraph(const std::filesystem::path& path);
void save_hypergraph(const Hypergraph& h, const std::filesystem::path& path);

EdgeDependentLabels load_labels(const std::filesystem::path& path, const Hypergraph& h, int num_classes);
void save_labels(const Hypergraph& h, const EdgeDependentLabels& labels, const std::filesystem::path& path);

// "token<TAB>id" per line.
std::unordered_map<std::string, NodeId> load_vocabulary(const std::filesystem::path& path);

/// Shuffles `labeled_edges` with `seed` and cuts it into train/val/test.
/// Val and test receive floor(r * M) edges; the remainder goes to train.
Split split_edges(std::vector<EdgeId> labeled_edges, std::array<double, 3> ratios, std::uint64_t seed);

struct SyntheticOptions {
  std::size_t num_nodes = 300;
  std::size_t num_edges = 500;
  std::size_t min_edge_size = 3;
  std::size_t max_edge_size = 8;
  int num_classes = 3;
  std::uint64_t seed = 7;
};

/// Label of member v in e is the num_classes-quantile bucket of
/// Order(deg v, {deg u : u in e}) / |e|.
int quantile_label(std::size_t order, std::size_t edge_size, int num_classes);

/// Hyperedges drawn with power-law biased node selection; labels follow the
/// within-edge degree order through quantile_label().
std::pair<Hypergraph, EdgeDependentLabels> generate_synthetic(const SyntheticOptions& options);

}  // namespace whatsnet
