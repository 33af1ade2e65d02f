#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "whatsnet/autodiff.hpp"
#include "whatsnet/hypergraph.hpp"

namespace whatsnet {

enum class FeatureSource { kRandom, kFile, kRandomWalk };

/// Initial node features X^(0), one row per node.
struct FeatureMatrix {
  ad::Tensor values;
  FeatureSource source = FeatureSource::kRandom;
};

/// Standard normal entries, deterministic per seed.
FeatureMatrix random_features(std::size_t num_nodes, std::size_t dim, std::uint64_t seed);

struct RandomWalkOptions {
  std::size_t dim = 64;
  std::size_t walk_length = 40;
  std::size_t walks_per_node = 10;
  std::size_t window = 10;
  std::size_t negative_samples = 5;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  std::size_t epochs = 1;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

/// Node sequences of node -> incident hyperedge -> member steps. The member
/// is drawn among e \ {current} (or the current node for a singleton), each
/// candidate u weighted 1/p if u is the previous node, 1 if u shares a
/// hyperedge with it and 1/q otherwise. Isolated nodes start no walk.
std::vector<std::vector<NodeId>> random_walks(const Hypergraph& h, const RandomWalkOptions& options);

/// Skip-gram with negative sampling over random_walks(). Isolated nodes get
/// zero rows and a warning on stderr.
FeatureMatrix rw_features(const Hypergraph& h, const RandomWalkOptions& options);

/// Text format: header "N d", then N rows of d reals.
FeatureMatrix load_features(const std::filesystem::path& path);
void save_features(const FeatureMatrix& features, const std::filesystem::path& path);

}  // namespace whatsnet
