#include "whatsnet/train.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "config_json.hpp"
#include "json.hpp"
#include "seeding.hpp"
#include "whatsnet/error.hpp"

namespace whatsnet {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (batch_size == 0) throw Error("batch size must be positive");
  if (max_epochs == 0) throw Error("max epochs must be positive");
}

namespace {

json metrics_json(const Metrics& m) {
  return json{{"micro_f1", m.micro_f1}, {"macro_f1", m.macro_f1}, {"avg_jsd", m.avg_jsd}};
}

bool same_metrics(const Metrics& a, const Metrics& b) {
  return a.micro_f1 == b.micro_f1 && a.macro_f1 == b.macro_f1 && a.avg_jsd == b.avg_jsd;
}

// Stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kDropoutStream = 3;
constexpr std::uint64_t kSampleStream = 4;

}  // namespace

std::string TrainReport::to_json() const {
  json epochs_json = json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back(json{{"epoch", e.epoch},
                               {"train_loss", e.train_loss},
                               {"val", metrics_json(e.val)},
                               {"wall_seconds", e.wall_seconds}});
  }
  json j{{"format_version", 1},
         {"model_config", detail::config_to_json(model_config)},
         {"train_config",
          {{"learning_rate", train_config.learning_rate},
           {"batch_size", train_config.batch_size},
           {"max_epochs", train_config.max_epochs},
           {"patience", train_config.patience},
           {"seed", train_config.seed}}},
         {"epochs", std::move(epochs_json)},
         {"best_epoch", best_epoch},
         {"best_val", metrics_json(best_val)},
         {"checkpoint", checkpoint_path}};
  return j.dump(2);
}

bool TrainReport::same_results(const TrainReport& other) const {
  if (!(model_config == other.model_config) || !(train_config == other.train_config) ||
      best_epoch != other.best_epoch || !same_metrics(best_val, other.best_val) ||
      checkpoint_path != other.checkpoint_path || epochs.size() != other.epochs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& a = epochs[i];
    const auto& b = other.epochs[i];
    if (a.epoch != b.epoch || a.train_loss != b.train_loss || !same_metrics(a.val, b.val)) return false;
  }
  return true;
}

PredictionSet predict_edges(const WhatsNet& model, const Hypergraph& h, const EmbeddingState& state,
                            const EdgeDependentLabels& labels, std::span<const EdgeId> edges) {
  PredictionSet preds = truth_pairs(h, labels, edges);
  for (auto& p : preds) {
    const auto members = h.edge(p.edge);
    const auto offset = std::find(members.begin(), members.end(), p.node) - members.begin();
    p.predicted = model.predict_pair(h, h.pair_offset(p.edge) + static_cast<PairId>(offset), state).label;
  }
  return preds;
}

PredictionSet predict_edges(const WhatsNet& model, const Dataset& data, std::span<const EdgeId> edges) {
  const EmbeddingState state = model.embed(data.inputs(), kEvalSampleSeed);
  return predict_edges(model, data.graph, state, data.labels, edges);
}

TrainResult train(const Dataset& data, const Split& split, const WhatsNetConfig& model_config,
                  const TrainConfig& config) {
  config.validate();
  model_config.validate();
  if (data.labels.num_classes() != model_config.num_classes) {
    throw Error("labels have " + std::to_string(data.labels.num_classes()) + " classes, model expects " +
                std::to_string(model_config.num_classes));
  }
  std::vector<EdgeId> train_edges;
  for (EdgeId e : split.train) {
    if (data.labels.is_labeled(e)) train_edges.push_back(e);
  }
  if (train_edges.empty()) throw Error("training split has no labeled hyperedges");

  const Hypergraph& h = data.graph;
  WhatsNet model(model_config, detail::derive_seed(config.seed, kInitStream));
  ad::ParamStore best_params = model.params();
  TrainReport report;
  report.model_config = model_config;
  report.train_config = config;

  std::mt19937_64 shuffle_rng(detail::derive_seed(config.seed, kShuffleStream));
  std::mt19937_64 dropout_rng(detail::derive_seed(config.seed, kDropoutStream));
  const ad::AdamOptions adam{config.learning_rate};
  const ModelInputs inputs = data.inputs();
  double best_accuracy = -1.0;
  std::size_t since_improvement = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t sample_seed = detail::derive_seed(detail::derive_seed(config.seed, kSampleStream), epoch);
    std::shuffle(train_edges.begin(), train_edges.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t pair_count = 0;

    for (std::size_t b = 0; b < train_edges.size(); b += config.batch_size) {
      const std::size_t end = std::min(train_edges.size(), b + config.batch_size);
      std::vector<PairId> pairs;
      std::vector<int> targets;
      for (std::size_t i = b; i < end; ++i) {
        const EdgeId e = train_edges[i];
        for (std::size_t k = 0; k < h.edge_size(e); ++k) {
          const PairId p = h.pair_offset(e) + static_cast<PairId>(k);
          pairs.push_back(p);
          targets.push_back(data.labels.label(p));
        }
      }
      try {
        const ForwardPlan plan = ForwardPlan::for_pairs(h, model_config, pairs, sample_seed);
        ad::Tape tape;
        ForwardContext ctx{tape, model.params(), model_config.heads, model_config.dropout, true, dropout_rng};
        const LayerState state = model.forward(ctx, inputs, plan);
        const ad::Var loss = ad::cross_entropy_from_logits(model.pair_logits(ctx, inputs, state, pairs), targets);
        model.params().zero_grad();
        tape.backward(loss);
        ad::adam_step(model.params(), adam);
        loss_sum += loss.value()[0] * static_cast<double>(pairs.size());
        pair_count += pairs.size();
      } catch (const Error& err) {
        throw Error("training diverged at epoch " + std::to_string(epoch) + ": " + err.what());
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(pair_count);
    const PredictionSet val = predict_edges(model, data, split.val);
    if (!val.empty()) record.val = evaluate(val, model_config.num_classes);
    record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(record);

    if (val.empty() || record.val.micro_f1 > best_accuracy) {
      best_accuracy = record.val.micro_f1;
      report.best_epoch = epoch;
      report.best_val = record.val;
      best_params = model.params();
      since_improvement = 0;
    } else if (++since_improvement > config.patience) {
      break;
    }
  }

  return {WhatsNet(model_config, std::move(best_params)), std::move(report)};
}

GridResult grid_search(const Dataset& data, const Split& split, const WhatsNetConfig& model_config,
                       const TrainConfig& base, const GridSpec& grid) {
  if (grid.learning_rates.empty() || grid.batch_sizes.empty()) throw Error("grid search needs a nonempty grid");
  GridResult result{{}, {}, 0, train(data, split, model_config, [&] {
                                  TrainConfig c = base;
                                  c.learning_rate = grid.learning_rates[0];
                                  c.batch_size = grid.batch_sizes[0];
                                  return c;
                                }()),
                    {}};
  for (double lr : grid.learning_rates) {
    for (std::size_t bs : grid.batch_sizes) {
      TrainConfig c = base;
      c.learning_rate = lr;
      c.batch_size = bs;
      result.candidates.push_back(c);
    }
  }
  result.val.push_back(result.best.report.best_val);
  for (std::size_t i = 1; i < result.candidates.size(); ++i) {
    TrainResult run = train(data, split, model_config, result.candidates[i]);
    result.val.push_back(run.report.best_val);
    if (run.report.best_val.selection_score() > result.val[result.best_index].selection_score()) {
      result.best_index = i;
      result.best = std::move(run);
    }
  }
  const PredictionSet test = predict_edges(result.best.model, data, split.test);
  if (!test.empty()) result.test = evaluate(test, model_config.num_classes);
  return result;
}

}  // namespace whatsnet
