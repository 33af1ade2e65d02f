#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"
#include "whatsnet/centrality.hpp"
#include "whatsnet/error.hpp"
#include "whatsnet/model.hpp"

namespace whatsnet {
namespace {

using ad::Tensor;
using testing::max_abs_diff;
using testing::random_tensor;

WhatsNetConfig small_config() {
  WhatsNetConfig c;
  c.input_dim = 8;
  c.hidden_dim = 8;
  c.final_dim = 8;
  c.heads = 2;
  c.inducing_points = 2;
  c.dropout = 0.0;
  c.num_classes = 3;
  return c;
}

struct Instance {
  Hypergraph h;
  Tensor x;
  PositionalEncodingTable pe;

  Instance(Hypergraph graph, std::size_t dim, std::uint64_t seed) : h(std::move(graph)) {
    std::mt19937_64 rng(seed);
    x = random_tensor(h.num_nodes(), dim, rng);
    pe = batch_pe(h, compute_all(h));
  }
  ModelInputs inputs() const { return {h, x, pe}; }
};

std::size_t closed_form_count(const WhatsNetConfig& c) {
  std::size_t total = 0;
  for (std::size_t l = 1; l <= c.num_layers; ++l) {
    const std::size_t d = c.width(l);
    if (c.width(l - 1) != d) total += 2 * c.width(l - 1) * d;
    const std::size_t pe = c.layer_uses_pe(l) ? kNumCentralities * d : 0;
    const std::size_t att = c.use_within_att ? c.att_stack * within_att_param_count(d, c.inducing_points) : 0;
    total += 2 * (pe + att + mab_param_count(d));
  }
  const std::size_t d_last = c.width(c.num_layers);
  const std::size_t in = c.classifier == ClassifierInput::kConcat ? 2 * d_last : d_last;
  return total + (in + 1) * static_cast<std::size_t>(c.num_classes);
}

TEST(Config, WidthsAndValidation) {
  WhatsNetConfig c;
  c.num_layers = 2;
  EXPECT_EQ(c.width(0), 64u);
  EXPECT_EQ(c.width(1), 64u);
  EXPECT_EQ(c.width(2), 128u);
  c.heads = 3;
  EXPECT_THROW(c.validate(), Error);
  c.heads = 4;
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c.dropout = 0.5;
  c.num_layers = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Params, CountMatchesClosedForm) {
  for (bool pe : {true, false}) {
    for (bool att : {true, false}) {
      for (auto cls : {ClassifierInput::kConcat, ClassifierInput::kIntermediate}) {
        for (std::size_t layers : {1u, 2u}) {
          WhatsNetConfig c;
          c.num_layers = layers;
          c.input_dim = 12;
          c.hidden_dim = 8;
          c.final_dim = 16;
          c.use_pe = pe;
          c.use_within_att = att;
          c.classifier = cls;
          EXPECT_EQ(WhatsNet(c, 1).params().num_scalars(), closed_form_count(c));
        }
      }
    }
  }
}

TEST(Params, DeterministicPerSeedAndXavierBounded) {
  const WhatsNetConfig c = small_config();
  const WhatsNet a(c, 5);
  const WhatsNet b(c, 5);
  const WhatsNet other(c, 6);
  bool differs = false;
  for (const auto& [name, p] : a.params().params()) {
    EXPECT_EQ(p.value, b.params().get(name).value) << name;
    differs = differs || !(p.value == other.params().get(name).value);
    const bool is_bias = name.find("bias") != std::string::npos || name.find(".b1") != std::string::npos ||
                         name.find(".b2") != std::string::npos || name.find("gain") != std::string::npos;
    if (!is_bias) {
      const double bound = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
      bool nonzero = false;
      for (double x : p.value.values()) {
        EXPECT_LE(std::abs(x), bound) << name;
        nonzero = nonzero || x != 0.0;
      }
      EXPECT_TRUE(nonzero) << name;
    }
  }
  EXPECT_TRUE(differs);
}

TEST(InitHyperedgeEmbeddings, RowNormalizedIncidenceTimesFeatures) {
  std::mt19937_64 rng(1);
  const Hypergraph h = testing::tiny_hypergraph();
  const Tensor x = random_tensor(6, 3, rng);
  const Tensor got = init_hyperedge_embeddings(h, x);
  for (EdgeId e = 0; e < 4; ++e) {
    for (std::size_t c = 0; c < 3; ++c) {
      double expected = 0.0;
      for (NodeId v = 0; v < 6; ++v) {
        const auto members = h.edge(e);
        if (std::find(members.begin(), members.end(), v) != members.end()) {
          expected += x(static_cast<std::size_t>(v), c) / static_cast<double>(members.size());
        }
      }
      EXPECT_NEAR(got(static_cast<std::size_t>(e), c), expected, 1e-15);
    }
  }
  // Singleton hyperedge {5} copies its member.
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(got(3, c), x(5, c));
}

TEST(Sampling, SubsetSortedAndDeterministic) {
  const Hypergraph h(3, {{0}, {0, 1}, {0, 2}, {0, 1, 2}, {0}});
  const auto all = sample_incident_pairs(h, 0, 0, 1);
  EXPECT_EQ(all.size(), 5u);
  const auto big = sample_incident_pairs(h, 0, 10, 1);
  EXPECT_EQ(big, all);
  const auto some = sample_incident_pairs(h, 0, 3, 1);
  EXPECT_EQ(some.size(), 3u);
  EXPECT_TRUE(std::is_sorted(some.begin(), some.end()));
  EXPECT_EQ(some, sample_incident_pairs(h, 0, 3, 1));
  bool varies = false;
  for (std::uint64_t seed = 2; seed < 20 && !varies; ++seed) varies = sample_incident_pairs(h, 0, 3, seed) != some;
  EXPECT_TRUE(varies);
}

TEST(Forward, ShapesAndIsolatedNodeCopy) {
  WhatsNetConfig c = small_config();
  const Instance in(Hypergraph(7, {{0, 1, 2}, {2, 3, 4, 5}, {1, 4}, {5}}), 8, 2);
  const WhatsNet model(c, 3);
  const EmbeddingState s = model.embed(in.inputs(), 0);
  EXPECT_EQ(s.x.rows(), 7u);
  EXPECT_EQ(s.x.cols(), 8u);
  EXPECT_EQ(s.h.rows(), 4u);
  EXPECT_EQ(s.intermediate.rows(), in.h.total_size());
  for (std::size_t col = 0; col < 8; ++col) EXPECT_EQ(s.x(6, col), in.x(6, col));
  EXPECT_TRUE(s.x.all_finite());
}

TEST(Forward, EvalModeDeterministic) {
  const Instance in(testing::tiny_hypergraph(), 8, 4);
  WhatsNetConfig c = small_config();
  c.dropout = 0.5;
  const WhatsNet model(c, 3);
  const EmbeddingState a = model.embed(in.inputs(), 0);
  const EmbeddingState b = model.embed(in.inputs(), 0);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.h, b.h);
}

TEST(Forward, MoreLayersChangeOutput) {
  const Instance in(testing::tiny_hypergraph(), 8, 5);
  WhatsNetConfig c = small_config();
  const EmbeddingState one = WhatsNet(c, 1).embed(in.inputs(), 0);
  c.num_layers = 2;
  const EmbeddingState two = WhatsNet(c, 1).embed(in.inputs(), 0);
  EXPECT_GT(max_abs_diff(one.x, two.x), 1e-6);
}

TEST(Forward, LiftHandlesWidthChanges) {
  const Instance in(testing::tiny_hypergraph(), 6, 6);
  WhatsNetConfig c = small_config();
  c.input_dim = 6;
  c.num_layers = 2;
  c.final_dim = 12;
  const WhatsNet model(c, 1);
  EXPECT_TRUE(model.params().contains("layer1.lift_x"));
  EXPECT_TRUE(model.params().contains("layer2.lift_h"));
  const EmbeddingState s = model.embed(in.inputs(), 0);
  EXPECT_EQ(s.x.cols(), 12u);
  EXPECT_EQ(s.h.cols(), 12u);
}

TEST(Forward, RejectsMismatchedFeatures) {
  const Instance in(testing::tiny_hypergraph(), 5, 7);
  const WhatsNet model(small_config(), 1);
  EXPECT_THROW(model.embed(in.inputs(), 0), Error);
}

TEST(Forward, LargeSampleSizeEqualsNoSampling) {
  const Instance in(testing::tiny_hypergraph(), 8, 8);
  WhatsNetConfig c = small_config();
  const EmbeddingState all = WhatsNet(c, 2).embed(in.inputs(), 0);
  c.sample_size = 10;
  const EmbeddingState big = WhatsNet(c, 2).embed(in.inputs(), 0);
  EXPECT_EQ(all.x, big.x);
  EXPECT_EQ(all.h, big.h);
}

TEST(Forward, MemberStorageOrderDoesNotChangeHyperedgeEmbeddings) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Hypergraph h = testing::random_hypergraph(10, 8, 6, rng);
    auto edges = h.edge_lists();
    for (auto& e : edges) std::shuffle(e.begin(), e.end(), rng);
    const Instance a(h, 8, 10 + trial);
    Instance b(Hypergraph(10, edges), 8, 10 + trial);
    b.x = a.x;
    const WhatsNet model(small_config(), 3);
    const EmbeddingState sa = model.embed(a.inputs(), 0);
    const EmbeddingState sb = model.embed(b.inputs(), 0);
    EXPECT_LT(max_abs_diff(sa.h, sb.h), 1e-12);
    EXPECT_LT(max_abs_diff(sa.x, sb.x), 1e-12);
  }
}

TEST(Forward, ReceptiveFieldPlanMatchesFullForward) {
  std::mt19937_64 rng(11);
  for (std::size_t layers : {1u, 2u}) {
    for (std::size_t sample : {0u, 2u}) {
      WhatsNetConfig c = small_config();
      c.num_layers = layers;
      c.sample_size = sample;
      const Instance in(testing::random_hypergraph(20, 15, 5, rng), 8, 12);
      const WhatsNet model(c, 4);
      const ModelInputs inputs = in.inputs();
      std::vector<PairId> pairs;
      for (PairId p = 0; p < static_cast<PairId>(in.h.total_size()); p += 3) pairs.push_back(p);

      ad::ParamStore store = model.params();
      std::mt19937_64 drop(0);
      ad::Tape full_tape;
      ForwardContext full_ctx{full_tape, store, c.heads, 0.0, false, drop};
      const auto full_plan = ForwardPlan::full(in.h, c, 17);
      const auto full_state = model.forward(full_ctx, inputs, full_plan);
      const Tensor expected = model.pair_logits(full_ctx, inputs, full_state, pairs).value();

      ad::Tape part_tape;
      ForwardContext part_ctx{part_tape, store, c.heads, 0.0, false, drop};
      const auto plan = ForwardPlan::for_pairs(in.h, c, pairs, 17);
      EXPECT_LE(plan.nodes[0].size(), in.h.num_nodes());
      const auto state = model.forward(part_ctx, inputs, plan);
      const Tensor got = model.pair_logits(part_ctx, inputs, state, pairs).value();
      EXPECT_LT(max_abs_diff(got, expected), 1e-12) << "layers " << layers << " sample " << sample;
    }
  }
}

TEST(Forward, ReceptiveFieldShrinksForLocalBatches) {
  // Two disconnected components: a batch in one never touches the other.
  const Hypergraph h(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}});
  WhatsNetConfig c = small_config();
  const PairId pairs[] = {0, 1};
  const auto plan = ForwardPlan::for_pairs(h, c, pairs, 0);
  EXPECT_EQ(plan.nodes[0], (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(plan.edges[1], (std::vector<EdgeId>{0, 1}));
}

TEST(Classify, ZeroWeightsPickClassZeroAndScalingKeepsArgmax) {
  const Instance in(testing::tiny_hypergraph(), 8, 13);
  WhatsNet model(small_config(), 1);
  model.params().get("classifier.weight").value.fill(0.0);
  const EmbeddingState s = model.embed(in.inputs(), 0);
  const Prediction p = model.classify(in.h, 2, 1, s);
  EXPECT_EQ(p.label, 0);
  EXPECT_EQ(p.logits.size(), 3u);
  EXPECT_EQ(p.logits[0], p.logits[1]);
  EXPECT_THROW(model.classify(in.h, 0, 1, s), Error);
  EXPECT_THROW(model.classify_intermediate(in.h, 2, 1, s), Error);

  const std::vector<double> logits{0.3, -1.0, 2.5};
  std::vector<double> scaled = logits;
  for (double& x : scaled) x *= 7.0;
  EXPECT_EQ(argmax(logits), argmax(scaled));
  EXPECT_EQ(argmax(std::vector<double>{1.0, 1.0}), 0);
}

TEST(Classify, ConcatMatchesPairLogits) {
  const Instance in(testing::tiny_hypergraph(), 8, 14);
  const WhatsNet model(small_config(), 2);
  const EmbeddingState s = model.embed(in.inputs(), 0);
  ad::ParamStore store = model.params();
  std::mt19937_64 drop(0);
  ad::Tape tape;
  ForwardContext ctx{tape, store, 2, 0.0, false, drop};
  const auto state = model.forward(ctx, in.inputs(), ForwardPlan::full(in.h, model.config(), 0));
  std::vector<PairId> pairs(in.h.total_size());
  std::iota(pairs.begin(), pairs.end(), 0);
  const Tensor logits = model.pair_logits(ctx, in.inputs(), state, pairs).value();
  for (PairId p : pairs) {
    const Prediction pred = model.predict_pair(in.h, p, s);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(pred.logits[c], logits(static_cast<std::size_t>(p), c), 1e-12);
  }
}

TEST(Classify, IntermediateModeIsEdgeDependentWithoutLastLayerPe) {
  WhatsNetConfig c = small_config();
  c.classifier = ClassifierInput::kIntermediate;
  EXPECT_FALSE(c.layer_uses_pe(1));
  const Instance in(testing::tiny_hypergraph(), 8, 15);
  const WhatsNet model(c, 3);
  EXPECT_FALSE(model.params().contains("layer1.v2e.pe"));
  const EmbeddingState s = model.embed(in.inputs(), 0);
  const Prediction a = model.classify_intermediate(in.h, 2, 0, s);
  const Prediction b = model.classify_intermediate(in.h, 2, 1, s);
  EXPECT_EQ(a.logits.size(), 3u);
  EXPECT_NE(a.logits, b.logits);
  EXPECT_THROW(model.classify(in.h, 2, 0, s), Error);
}

TEST(Ablation, NoPeIgnoresCentralities) {
  WhatsNetConfig c = small_config();
  c.use_pe = false;
  Instance in(testing::tiny_hypergraph(), 8, 16);
  const WhatsNet model(c, 3);
  const EmbeddingState a = model.embed(in.inputs(), 0);
  CentralityMatrix f = compute_all(in.h);
  for (double& x : f.values) x = -x;
  in.pe = batch_pe(in.h, f);
  const EmbeddingState b = model.embed(in.inputs(), 0);
  EXPECT_EQ(a.x, b.x);
  EXPECT_FALSE(model.params().contains("layer1.e2v.pe"));
}

TEST(Ablation, NoWithinAttIdenticalMembersGiveIdenticalRows) {
  WhatsNetConfig c = small_config();
  c.use_within_att = false;
  c.use_pe = false;
  Instance in(Hypergraph(3, {{0, 1, 2}}), 8, 17);
  for (std::size_t v = 1; v < 3; ++v) {
    for (std::size_t col = 0; col < 8; ++col) in.x(v, col) = in.x(0, col);
  }
  c.classifier = ClassifierInput::kIntermediate;
  const EmbeddingState s = WhatsNet(c, 1).embed(in.inputs(), 0);
  for (std::size_t r = 1; r < 3; ++r) {
    for (std::size_t col = 0; col < 8; ++col) EXPECT_EQ(s.intermediate(r, col), s.intermediate(0, col));
  }
}

TEST(Gradients, ModelLossMatchesFiniteDifferences) {
  WhatsNetConfig c = small_config();
  c.dropout = 0.3;
  const Instance in(testing::tiny_hypergraph(), 8, 18);
  WhatsNet model(c, 7);
  std::vector<PairId> pairs(in.h.total_size());
  std::iota(pairs.begin(), pairs.end(), 0);
  std::vector<int> targets;
  for (PairId p : pairs) targets.push_back(p % 3);
  const auto errors = testing::gradient_errors(model.params(), [&](ad::Tape& tape, ad::ParamStore& store) {
    std::mt19937_64 drop(21);
    ForwardContext ctx{tape, store, c.heads, c.dropout, true, drop};
    const auto state = model.forward(ctx, in.inputs(), ForwardPlan::full(in.h, c, 0));
    return ad::cross_entropy_from_logits(model.pair_logits(ctx, in.inputs(), state, pairs), targets);
  });
  for (const auto& [name, err] : errors) EXPECT_LT(err, 1e-4) << name;
}

TEST(Checkpoint, RoundTripReproducesPredictions) {
  testing::TempDir dir;
  WhatsNetConfig c = small_config();
  c.sample_size = 2;
  const Instance in(testing::tiny_hypergraph(), 8, 19);
  const WhatsNet model(c, 9);
  save_checkpoint(dir / "ck.json", model, R"({"split_seed": 3})");
  const Checkpoint ck = load_checkpoint(dir / "ck.json");
  EXPECT_EQ(ck.config, c);
  EXPECT_NE(ck.metadata_json.find("split_seed"), std::string::npos);
  const WhatsNet loaded(ck.config, ck.params);
  for (const auto& [name, p] : model.params().params()) EXPECT_EQ(p.value, loaded.params().get(name).value) << name;
  EXPECT_EQ(model.embed(in.inputs(), 0).x, loaded.embed(in.inputs(), 0).x);
}

TEST(Checkpoint, RejectsShapeAndVersionMismatch) {
  testing::TempDir dir;
  const WhatsNet model(small_config(), 9);
  save_checkpoint(dir / "ck.json", model, "");
  std::string text = testing::read_file(dir / "ck.json");

  std::string bad_version = text;
  bad_version.replace(bad_version.find("\"format_version\":1"), 18, "\"format_version\":2");
  testing::write_file(dir / "v.json", bad_version);
  EXPECT_THROW(load_checkpoint(dir / "v.json"), Error);

  std::string bad_shape = text;
  bad_shape.replace(bad_shape.find("\"hidden_dim\":8"), 14, "\"hidden_dim\":4");
  bad_shape.replace(bad_shape.find("\"final_dim\":8"), 13, "\"final_dim\":4");
  testing::write_file(dir / "s.json", bad_shape);
  EXPECT_THROW(load_checkpoint(dir / "s.json"), Error);

  std::string bad_order = text;
  bad_order.replace(bad_order.find("\"degree\""), 8, "\"foobar\"");
  testing::write_file(dir / "o.json", bad_order);
  EXPECT_THROW(load_checkpoint(dir / "o.json"), Error);

  testing::write_file(dir / "junk.json", "{not json");
  EXPECT_THROW(load_checkpoint(dir / "junk.json"), Error);
}

}  // namespace
}  // namespace whatsnet
