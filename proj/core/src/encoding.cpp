#include "whatsnet/encoding.hpp"

#include <algorithm>
#include <numeric>

#include "whatsnet/error.hpp"

namespace whatsnet {

std::size_t order(double a, std::span<const double> set) {
  std::size_t count = 0;
  for (double x : set) count += x <= a ? 1 : 0;
  return count;
}

std::array<double, kNumCentralities> within_order_pe(const Hypergraph& h, NodeId v, EdgeId e,
                                                     const CentralityMatrix& f) {
  const auto members = h.edge(e);
  if (std::find(members.begin(), members.end(), v) == members.end()) {
    throw Error("node " + std::to_string(v) + " is not a member of hyperedge " + std::to_string(e));
  }
  std::array<double, kNumCentralities> pe{};
  std::vector<double> values(members.size());
  const double size = static_cast<double>(members.size());
  for (std::size_t c = 0; c < kNumCentralities; ++c) {
    for (std::size_t i = 0; i < members.size(); ++i) values[i] = f.at(members[i], c);
    pe[c] = static_cast<double>(order(f.at(v, c), values)) / size;
  }
  return pe;
}

PositionalEncodingTable batch_pe(const Hypergraph& h, const CentralityMatrix& f) {
  PositionalEncodingTable table;
  table.num_pairs = h.total_size();
  table.values.assign(h.total_size() * kNumCentralities, 0.0);
  std::vector<std::size_t> idx;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    const auto members = h.edge(id);
    const std::size_t n = members.size();
    const double size = static_cast<double>(n);
    const auto base = static_cast<std::size_t>(h.pair_offset(id));
    idx.resize(n);
    for (std::size_t c = 0; c < kNumCentralities; ++c) {
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return f.at(members[a], c) < f.at(members[b], c); });
      // Walk tie groups; every member of a group gets the index one past the
      // group's end as its order.
      std::size_t start = 0;
      while (start < n) {
        std::size_t end = start + 1;
        const double value = f.at(members[idx[start]], c);
        while (end < n && f.at(members[idx[end]], c) == value) ++end;
        const double pe = static_cast<double>(end) / size;
        for (std::size_t k = start; k < end; ++k) table.values[(base + idx[k]) * kNumCentralities + c] = pe;
        start = end;
      }
    }
  }
  return table;
}

}  // namespace whatsnet
