#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"
#include "whatsnet/error.hpp"
#include "whatsnet/hypergraph.hpp"

namespace whatsnet {
namespace {

using testing::TempDir;
using testing::write_file;

TEST(Hypergraph, IncidenceIsConsistent) {
  const Hypergraph h = testing::tiny_hypergraph();
  EXPECT_EQ(h.num_nodes(), 6u);
  EXPECT_EQ(h.num_edges(), 4u);
  EXPECT_EQ(h.total_size(), 10u);
  std::size_t degree_sum = 0;
  for (NodeId v = 0; v < 6; ++v) degree_sum += h.degree(v);
  EXPECT_EQ(degree_sum, h.total_size());
  for (NodeId v = 0; v < 6; ++v) {
    auto edges = h.incident(v);
    auto pairs = h.incident_pairs(v);
    ASSERT_EQ(edges.size(), pairs.size());
    EXPECT_TRUE(std::is_sorted(edges.begin(), edges.end()));
    for (std::size_t i = 0; i < edges.size(); ++i) {
      EXPECT_EQ(h.pair_node(pairs[i]), v);
      EXPECT_EQ(h.pair_edge(pairs[i]), edges[i]);
    }
  }
  EXPECT_EQ(h.incident(2).size(), 2u);
  EXPECT_EQ(h.pair_offset(1), 3);
}

TEST(Hypergraph, SizeSumEqualsDegreeSumOnRandomInstances) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Hypergraph h = testing::random_hypergraph(15, 12, 6, rng);
    std::size_t sizes = 0;
    for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) sizes += h.edge_size(e);
    std::size_t degrees = 0;
    for (NodeId v = 0; v < 15; ++v) degrees += h.degree(v);
    EXPECT_EQ(sizes, degrees);
    EXPECT_EQ(sizes, h.total_size());
  }
}

TEST(Hypergraph, RejectsInvalidEdges) {
  EXPECT_THROW(Hypergraph(3, {{0, 1}, {}}), Error);
  EXPECT_THROW(Hypergraph(3, {{0, 3}}), Error);
  EXPECT_THROW(Hypergraph(3, {{0, -1}}), Error);
  EXPECT_THROW(Hypergraph(3, {{1, 2, 1}}), Error);
}

TEST(HypergraphIo, RoundTrip) {
  TempDir dir;
  const Hypergraph h = testing::tiny_hypergraph();
  save_hypergraph(h, dir / "h.txt");
  EXPECT_EQ(load_hypergraph(dir / "h.txt"), h);
}

TEST(HypergraphIo, ParsesPlainFormat) {
  TempDir dir;
  write_file(dir / "h.txt", "4 2\n0 1 2\n3\n");
  const Hypergraph h = load_hypergraph(dir / "h.txt");
  EXPECT_EQ(h.num_nodes(), 4u);
  EXPECT_EQ(h.edge_size(0), 3u);
  EXPECT_EQ(h.edge(1)[0], 3);
}

TEST(HypergraphIo, ReportsMalformedInput) {
  TempDir dir;
  write_file(dir / "bad_header.txt", "4\n0 1\n");
  EXPECT_THROW(load_hypergraph(dir / "bad_header.txt"), Error);
  write_file(dir / "short.txt", "4 2\n0 1\n");
  EXPECT_THROW(load_hypergraph(dir / "short.txt"), Error);
  write_file(dir / "range.txt", "4 1\n0 4\n");
  EXPECT_THROW(load_hypergraph(dir / "range.txt"), Error);
  write_file(dir / "dup.txt", "4 1\n1 1\n");
  EXPECT_THROW(load_hypergraph(dir / "dup.txt"), Error);
  write_file(dir / "extra.txt", "4 1\n0 1\n2 3\n");
  EXPECT_THROW(load_hypergraph(dir / "extra.txt"), Error);
  write_file(dir / "word.txt", "4 1\n0 x\n");
  try {
    load_hypergraph(dir / "word.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("word.txt:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_hypergraph(dir / "missing.txt"), Error);
}

TEST(Labels, RoundTripWithUnlabeledEdges) {
  TempDir dir;
  const Hypergraph h = testing::tiny_hypergraph();
  const EdgeDependentLabels labels(h, 3, {{0, 1, 2}, {}, {2, 2}, {1}});
  EXPECT_FALSE(labels.is_labeled(1));
  EXPECT_EQ(labels.label(h.pair_offset(1)), EdgeDependentLabels::kUnlabeled);
  EXPECT_EQ(labels.labeled_edges(), (std::vector<EdgeId>{0, 2, 3}));
  save_labels(h, labels, dir / "y.txt");
  EXPECT_EQ(load_labels(dir / "y.txt", h, 3), labels);
}

TEST(Labels, RejectsMismatches) {
  TempDir dir;
  const Hypergraph h = testing::tiny_hypergraph();
  EXPECT_THROW(EdgeDependentLabels(h, 3, {{0, 1}, {}, {2, 2}, {1}}), Error);
  EXPECT_THROW(EdgeDependentLabels(h, 2, {{0, 1, 2}, {}, {0, 0}, {1}}), Error);
  write_file(dir / "count.txt", "0 1\n?\n0 0\n1\n");
  EXPECT_THROW(load_labels(dir / "count.txt", h, 3), Error);
  write_file(dir / "range.txt", "0 1 5\n?\n0 0\n1\n");
  EXPECT_THROW(load_labels(dir / "range.txt", h, 3), Error);
  write_file(dir / "lines.txt", "0 1 2\n?\n");
  EXPECT_THROW(load_labels(dir / "lines.txt", h, 3), Error);
}

TEST(Vocabulary, ParsesTokenIdLines) {
  TempDir dir;
  write_file(dir / "v.tsv", "alice\t0\nbob\t1\n");
  auto vocab = load_vocabulary(dir / "v.tsv");
  EXPECT_EQ(vocab.at("bob"), 1);
  write_file(dir / "bad.tsv", "alice 0\n");
  EXPECT_THROW(load_vocabulary(dir / "bad.tsv"), Error);
}

TEST(Split, SizesFollowRatiosWithRemainderInTrain) {
  std::vector<EdgeId> edges(10);
  std::iota(edges.begin(), edges.end(), 0);
  const Split s = split_edges(edges, {0.6, 0.2, 0.2}, 5);
  EXPECT_EQ(s.train.size(), 6u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);
  std::vector<EdgeId> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, edges);

  std::vector<EdgeId> eleven(11);
  std::iota(eleven.begin(), eleven.end(), 0);
  const Split r = split_edges(eleven, {0.6, 0.2, 0.2}, 5);
  EXPECT_EQ(r.train.size(), 7u);
  EXPECT_EQ(r.val.size(), 2u);
}

TEST(Split, DeterministicAndDegenerateRatios) {
  std::vector<EdgeId> edges(30);
  std::iota(edges.begin(), edges.end(), 0);
  const Split a = split_edges(edges, {0.6, 0.2, 0.2}, 9);
  const Split b = split_edges(edges, {0.6, 0.2, 0.2}, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  const Split all = split_edges(edges, {1.0, 0.0, 0.0}, 9);
  EXPECT_EQ(all.train.size(), 30u);
  EXPECT_THROW(split_edges(edges, {0.5, 0.2, 0.2}, 9), Error);
}

TEST(Synthetic, QuantileRule) {
  // C = 2, |e| = 4, orders 1..4.
  EXPECT_EQ(quantile_label(1, 4, 2), 0);
  EXPECT_EQ(quantile_label(2, 4, 2), 0);
  EXPECT_EQ(quantile_label(3, 4, 2), 1);
  EXPECT_EQ(quantile_label(4, 4, 2), 1);
  EXPECT_EQ(quantile_label(4, 4, 3), 2);
  EXPECT_EQ(quantile_label(1, 1, 3), 2);
}

TEST(Synthetic, LabelsFollowDegreeOrderAndAreDeterministic) {
  const auto [h, labels] = generate_synthetic({});
  EXPECT_EQ(h.num_nodes(), 300u);
  EXPECT_EQ(h.num_edges(), 500u);
  std::size_t min_deg = h.total_size();
  std::size_t max_deg = 0;
  for (NodeId v = 0; v < 300; ++v) {
    min_deg = std::min(min_deg, h.degree(v));
    max_deg = std::max(max_deg, h.degree(v));
  }
  EXPECT_GT(max_deg, 4 * std::max<std::size_t>(min_deg, 1));
  for (EdgeId e = 0; e < 500; ++e) {
    EXPECT_GE(h.edge_size(e), 3u);
    EXPECT_LE(h.edge_size(e), 8u);
    const auto members = h.edge(e);
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (h.degree(members[i]) < h.degree(members[j])) {
          EXPECT_LE(labels.label(h.pair_offset(e) + static_cast<PairId>(i)),
                    labels.label(h.pair_offset(e) + static_cast<PairId>(j)));
        }
      }
    }
  }
  const auto [h2, labels2] = generate_synthetic({});
  EXPECT_EQ(h, h2);
  EXPECT_EQ(labels, labels2);
  SyntheticOptions bad;
  bad.min_edge_size = 1;
  EXPECT_THROW(generate_synthetic(bad), Error);
}

TEST(Synthetic, RelabelingNodesPermutesLabelsConsistently) {
  const auto [h, labels] = generate_synthetic({});
  std::vector<NodeId> perm(h.num_nodes());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto edges = h.edge_lists();
  for (auto& e : edges) {
    for (auto& v : e) v = perm[v];
  }
  const Hypergraph hp(h.num_nodes(), edges);
  for (EdgeId e = 0; e < static_cast<EdgeId>(h.num_edges()); ++e) {
    const auto members = hp.edge(e);
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::size_t order = 0;
      for (NodeId u : members) order += hp.degree(u) <= hp.degree(members[i]) ? 1 : 0;
      EXPECT_EQ(quantile_label(order, members.size(), 3), labels.label(h.pair_offset(e) + static_cast<PairId>(i)));
    }
  }
}

}  // namespace
}  // namespace whatsnet
