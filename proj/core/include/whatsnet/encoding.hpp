#pragma once

#include <span>
#include <vector>

#include "whatsnet/centrality.hpp"
#include "whatsnet/hypergraph.hpp"

namespace whatsnet {

/// Number of elements of `set` that are <= a, counting multiplicity.
std::size_t order(double a, std::span<const double> set);

/// Within-hyperedge order encoding of node v in hyperedge e: component i is
/// order(F[v,i], {F[u,i] : u in e}) / |e|. Throws when v is not a member of e.
std::array<double, kNumCentralities> within_order_pe(const Hypergraph& h, NodeId v, EdgeId e,
                                                     const CentralityMatrix& f);

/// Encodings of every membership pair, one row of kNumCentralities values per
/// PairId. Both message-passing directions read the same row for (v, e).
struct PositionalEncodingTable {
  std::size_t num_pairs = 0;
  std::vector<double> values;

  std::span<const double> row(PairId p) const {
    return {values.data() + static_cast<std::size_t>(p) * kNumCentralities, kNumCentralities};
  }
};

/// Per-edge sort of each centrality column, O(Σ|e| log|e|).
PositionalEncodingTable batch_pe(const Hypergraph& h, const CentralityMatrix& f);

}  // namespace whatsnet
