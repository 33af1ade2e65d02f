#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "whatsnet/encoding.hpp"
#include "whatsnet/error.hpp"

namespace whatsnet {
namespace {

CentralityMatrix random_centralities(std::size_t n, std::mt19937_64& rng, int distinct_values) {
  CentralityMatrix f{n, std::vector<double>(n * kNumCentralities)};
  std::uniform_int_distribution<int> pick(0, distinct_values - 1);
  for (double& x : f.values) x = 0.1 + pick(rng);
  return f;
}

TEST(Order, CountsNonStrictly) {
  const std::vector<double> set{1.0, 2.0, 2.0, 5.0};
  EXPECT_EQ(order(0.5, set), 0u);
  EXPECT_EQ(order(1.0, set), 1u);
  EXPECT_EQ(order(2.0, set), 3u);
  EXPECT_EQ(order(5.0, set), 4u);
}

TEST(WithinOrderPe, TiesShareTheLargerOrder) {
  const Hypergraph h(3, {{0, 1, 2}});
  CentralityMatrix f{3, std::vector<double>(3 * kNumCentralities)};
  const double col0[] = {3.0, 3.0, 1.0};
  const double col1[] = {1.0, 2.0, 3.0};
  const double col2[] = {7.0, 7.0, 7.0};
  const double col3[] = {0.0, 2.0, 2.0};
  for (NodeId v = 0; v < 3; ++v) {
    f.at(v, 0) = col0[v];
    f.at(v, 1) = col1[v];
    f.at(v, 2) = col2[v];
    f.at(v, 3) = col3[v];
  }
  const auto pe0 = within_order_pe(h, 0, 0, f);
  const auto pe1 = within_order_pe(h, 1, 0, f);
  const auto pe2 = within_order_pe(h, 2, 0, f);
  EXPECT_DOUBLE_EQ(pe0[0], 1.0);
  EXPECT_DOUBLE_EQ(pe1[0], 1.0);
  EXPECT_DOUBLE_EQ(pe2[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pe0[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pe1[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pe2[1], 1.0);
  for (const auto& pe : {pe0, pe1, pe2}) EXPECT_DOUBLE_EQ(pe[2], 1.0);
  EXPECT_DOUBLE_EQ(pe0[3], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pe1[3], 1.0);
  EXPECT_DOUBLE_EQ(pe2[3], 1.0);
}

TEST(WithinOrderPe, SingletonEdgeIsAllOnes) {
  const Hypergraph h(2, {{1}, {0, 1}});
  std::mt19937_64 rng(1);
  const CentralityMatrix f = random_centralities(2, rng, 100);
  for (double x : within_order_pe(h, 1, 0, f)) EXPECT_EQ(x, 1.0);
  EXPECT_THROW(within_order_pe(h, 0, 0, f), Error);
}

TEST(WithinOrderPe, InvariantUnderMonotoneRescaling) {
  std::mt19937_64 rng(2);
  const Hypergraph h = testing::random_hypergraph(12, 10, 6, rng);
  const CentralityMatrix f = random_centralities(12, rng, 4);
  CentralityMatrix g = f;
  for (double& x : g.values) x = std::exp(3.0 * x) - 7.0;
  EXPECT_EQ(batch_pe(h, f).values, batch_pe(h, g).values);
}

TEST(BatchPe, MatchesPerPairDefinition) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Hypergraph h = testing::random_hypergraph(15, 12, 7, rng);
    const CentralityMatrix f = random_centralities(15, rng, 3);
    const PositionalEncodingTable table = batch_pe(h, f);
    ASSERT_EQ(table.num_pairs, h.total_size());
    for (PairId p = 0; p < static_cast<PairId>(h.total_size()); ++p) {
      const auto expected = within_order_pe(h, h.pair_node(p), h.pair_edge(p), f);
      const auto row = table.row(p);
      for (std::size_t c = 0; c < kNumCentralities; ++c) {
        EXPECT_EQ(row[c], expected[c]);
        EXPECT_GT(row[c], 0.0);
        EXPECT_LE(row[c], 1.0);
      }
    }
  }
}

TEST(BatchPe, FollowsMembersUnderStoragePermutation) {
  std::mt19937_64 rng(4);
  const Hypergraph h = testing::random_hypergraph(10, 6, 6, rng);
  const CentralityMatrix f = random_centralities(10, rng, 3);
  auto edges = h.edge_lists();
  for (auto& e : edges) std::reverse(e.begin(), e.end());
  const Hypergraph r(10, edges);
  const auto a = batch_pe(h, f);
  const auto b = batch_pe(r, f);
  for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
    const std::size_t k = h.edge_size(e);
    for (std::size_t i = 0; i < k; ++i) {
      const auto ra = a.row(h.pair_offset(e) + static_cast<PairId>(i));
      const auto rb = b.row(r.pair_offset(e) + static_cast<PairId>(k - 1 - i));
      EXPECT_TRUE(std::equal(ra.begin(), ra.end(), rb.begin()));
    }
  }
}

}  // namespace
}  // namespace whatsnet
