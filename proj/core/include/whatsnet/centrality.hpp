#pragma once

#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

#include "whatsnet/hypergraph.hpp"

namespace whatsnet {

inline constexpr std::size_t kNumCentralities = 4;
inline constexpr std::array<std::string_view, kNumCentralities> kCentralityNames = {"degree", "eigenvector",
                                                                                    "pagerank", "coreness"};

/// N x 4 row-major matrix, columns in kCentralityNames order.
struct CentralityMatrix {
  std::size_t num_nodes = 0;
  std::vector<double> values;

  double at(NodeId v, std::size_t column) const { return values[static_cast<std::size_t>(v) * kNumCentralities + column]; }
  double& at(NodeId v, std::size_t column) { return values[static_cast<std::size_t>(v) * kNumCentralities + column]; }
  std::vector<double> column(std::size_t c) const;
};

struct PowerIterationOptions {
  std::size_t max_iter = 100;
  double tol = 1e-10;
};

std::vector<double> degree_centrality(const Hypergraph& h);

/// Bucket peeling in O(Σ|e|): removing a node deletes every hyperedge that
/// contains it.
std::vector<double> coreness(const Hypergraph& h);

/// Leading eigenvector of A = I Iᵀ (self loops kept) by power iteration from
/// the uniform vector; unit Euclidean norm. Throws when no node has an
/// incident hyperedge.
std::vector<double> eigenvector_centrality(const Hypergraph& h, const PowerIterationOptions& options = {});

/// Damped PageRank on the row-stochastic P = D⁻¹ I Iᵀ; isolated (dangling)
/// nodes teleport uniformly. Output sums to 1.
std::vector<double> pagerank(const Hypergraph& h, double beta = 0.85, const PowerIterationOptions& options = {});

CentralityMatrix compute_all(const Hypergraph& h);

/// TSV with a header row "node" plus the column names, full precision.
void save_centralities(const CentralityMatrix& c, const std::filesystem::path& path);

}  // namespace whatsnet
