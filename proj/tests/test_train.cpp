#include <gtest/gtest.h>

#include "json.hpp"
#include "support.hpp"
#include "whatsnet/centrality.hpp"
#include "whatsnet/error.hpp"
#include "whatsnet/features.hpp"
#include "whatsnet/train.hpp"

namespace whatsnet {
namespace {

struct Fixture {
  Hypergraph h;
  EdgeDependentLabels labels;
  ad::Tensor x;
  PositionalEncodingTable pe;
  Split split;

  Fixture() {
    SyntheticOptions o;
    o.num_nodes = 60;
    o.num_edges = 80;
    o.max_edge_size = 5;
    std::tie(h, labels) = generate_synthetic(o);
    x = random_features(h.num_nodes(), 8, 1).values;
    pe = batch_pe(h, compute_all(h));
    split = split_edges(labels.labeled_edges(), {0.6, 0.2, 0.2}, 3);
  }
  Dataset data() const { return {h, labels, x, pe}; }
};

WhatsNetConfig small_config() {
  WhatsNetConfig c;
  c.input_dim = 8;
  c.hidden_dim = 8;
  c.final_dim = 8;
  c.heads = 2;
  c.inducing_points = 2;
  c.dropout = 0.2;
  c.sample_size = 3;
  return c;
}

TrainConfig short_run() {
  TrainConfig t;
  t.learning_rate = 5e-3;
  t.batch_size = 16;
  t.max_epochs = 6;
  t.patience = 10;
  t.seed = 4;
  return t;
}

TEST(TrainConfig, Validation) {
  TrainConfig t;
  t.learning_rate = 0.0;
  EXPECT_THROW(t.validate(), Error);
  t = {};
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), Error);
  t = {};
  t.max_epochs = 0;
  EXPECT_THROW(t.validate(), Error);
}

TEST(Train, LossDecreasesAndReportIsConsistent) {
  const Fixture f;
  const TrainResult r = train(f.data(), f.split, small_config(), short_run());
  ASSERT_EQ(r.report.epochs.size(), 6u);
  EXPECT_LT(r.report.epochs.back().train_loss, r.report.epochs.front().train_loss);
  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const auto& e : r.report.epochs) {
    if (e.val.micro_f1 > best) best = e.val.micro_f1, best_epoch = e.epoch;
  }
  EXPECT_EQ(r.report.best_epoch, best_epoch);
  EXPECT_EQ(r.report.best_val.micro_f1, best);
  // The returned model is the best epoch's.
  const Metrics again = evaluate(predict_edges(r.model, f.data(), f.split.val), 3);
  EXPECT_EQ(again.micro_f1, r.report.best_val.micro_f1);
  EXPECT_EQ(again.macro_f1, r.report.best_val.macro_f1);
  EXPECT_EQ(again.avg_jsd, r.report.best_val.avg_jsd);
}

TEST(Train, SameSeedIsBitIdentical) {
  const Fixture f;
  const TrainResult a = train(f.data(), f.split, small_config(), short_run());
  const TrainResult b = train(f.data(), f.split, small_config(), short_run());
  EXPECT_TRUE(a.report.same_results(b.report));
  for (const auto& [name, p] : a.model.params().params()) EXPECT_EQ(p.value, b.model.params().get(name).value);
  TrainConfig other = short_run();
  other.seed = 5;
  EXPECT_FALSE(a.report.same_results(train(f.data(), f.split, small_config(), other).report));
}

TEST(Train, PatienceStopsEarly) {
  const Fixture f;
  TrainConfig t = short_run();
  t.learning_rate = 1e-12;
  t.max_epochs = 20;
  t.patience = 2;
  const TrainResult r = train(f.data(), f.split, small_config(), t);
  // With a negligible step size validation accuracy stalls; the run ends
  // once more than `patience` epochs pass without improvement.
  const std::size_t last = r.report.epochs.back().epoch;
  EXPECT_LT(r.report.epochs.size(), 20u);
  EXPECT_EQ(last - r.report.best_epoch, t.patience + 1);
}

TEST(Train, EmptyValidationKeepsLastEpoch) {
  const Fixture f;
  Split s = f.split;
  s.val.clear();
  const TrainResult r = train(f.data(), s, small_config(), short_run());
  EXPECT_EQ(r.report.best_epoch, 5u);
}

TEST(Train, RejectsBadInputs) {
  const Fixture f;
  WhatsNetConfig c = small_config();
  c.num_classes = 4;
  EXPECT_THROW(train(f.data(), f.split, c, short_run()), Error);
  Split empty = f.split;
  empty.train.clear();
  EXPECT_THROW(train(f.data(), empty, small_config(), short_run()), Error);
}

TEST(Train, ReportJson) {
  const Fixture f;
  const TrainResult r = train(f.data(), f.split, small_config(), short_run());
  const auto j = nlohmann::json::parse(r.report.to_json());
  EXPECT_EQ(j.at("format_version"), 1);
  EXPECT_EQ(j.at("epochs").size(), 6u);
  EXPECT_EQ(j.at("best_epoch"), r.report.best_epoch);
  EXPECT_EQ(j.at("best_val").at("micro_f1").get<double>(), r.report.best_val.micro_f1);
  EXPECT_EQ(j.at("train_config").at("batch_size"), 16);
}

TEST(Train, CheckpointReproducesValidationMetrics) {
  const Fixture f;
  testing::TempDir dir;
  const TrainResult r = train(f.data(), f.split, small_config(), short_run());
  save_checkpoint(dir / "ck.json", r.model, "");
  const Checkpoint ck = load_checkpoint(dir / "ck.json");
  const WhatsNet loaded(ck.config, ck.params);
  const Metrics m = evaluate(predict_edges(loaded, f.data(), f.split.val), 3);
  EXPECT_EQ(m.micro_f1, r.report.best_val.micro_f1);
  EXPECT_EQ(m.macro_f1, r.report.best_val.macro_f1);
  EXPECT_EQ(m.avg_jsd, r.report.best_val.avg_jsd);
}

TEST(GridSearch, PicksHighestSelectionScoreLowestIndexOnTies) {
  const Fixture f;
  GridSpec grid;
  grid.learning_rates = {5e-3, 1e-12};
  grid.batch_sizes = {16, 32};
  TrainConfig base = short_run();
  base.max_epochs = 3;
  const GridResult g = grid_search(f.data(), f.split, small_config(), base, grid);
  ASSERT_EQ(g.candidates.size(), 4u);
  ASSERT_EQ(g.val.size(), 4u);
  EXPECT_EQ(g.candidates[1].learning_rate, 5e-3);
  EXPECT_EQ(g.candidates[1].batch_size, 32u);
  std::size_t expected = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (g.val[i].selection_score() > g.val[expected].selection_score()) expected = i;
  }
  EXPECT_EQ(g.best_index, expected);
  EXPECT_EQ(g.best.report.train_config, g.candidates[expected]);
  EXPECT_GT(g.test.micro_f1, 0.0);
}

}  // namespace
}  // namespace whatsnet
