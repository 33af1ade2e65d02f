#include "commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "whatsnet/centrality.hpp"
#include "whatsnet/encoding.hpp"
#include "whatsnet/error.hpp"
#include "whatsnet/eval.hpp"
#include "whatsnet/rank.hpp"

namespace whatsnet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<double, 3> kSplitRatios{0.6, 0.2, 0.2};

bool on(const std::string& flag) { return flag == "on"; }

void with_output(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write(out);
  if (!out) throw Error("failed writing " + path);
}

struct LoadedData {
  Hypergraph graph;
  EdgeDependentLabels labels;
  FeatureMatrix features;
  PositionalEncodingTable pe;
  json feature_meta;

  Dataset dataset() const { return {graph, labels, features.values, pe}; }
};

// Features come from a file when a path is given, otherwise from the seeded
// generator; `meta` records enough to rebuild them.
FeatureMatrix load_or_generate_features(const DataFlags& d, const Hypergraph& h, std::uint64_t seed, json& meta) {
  if (!d.features.empty()) {
    FeatureMatrix f = load_features(d.features);
    if (f.values.rows() != h.num_nodes()) {
      throw Error(d.features + " has " + std::to_string(f.values.rows()) + " rows, hypergraph has " +
                  std::to_string(h.num_nodes()) + " nodes");
    }
    meta = {{"source", "file"}, {"path", d.features}, {"dim", f.values.cols()}};
    return f;
  }
  meta = {{"source", "random"}, {"dim", d.feature_dim}, {"seed", seed}};
  return random_features(h.num_nodes(), d.feature_dim, seed);
}

LoadedData load_data(const DataFlags& d, bool labels_required, std::uint64_t feature_seed) {
  if (d.hypergraph.empty()) throw Error("--hypergraph is required");
  if (labels_required && d.labels.empty()) throw Error("--labels is required");
  LoadedData out;
  out.graph = load_hypergraph(d.hypergraph);
  if (!d.labels.empty()) {
    out.labels = load_labels(d.labels, out.graph, d.classes);
  } else {
    out.labels = EdgeDependentLabels(out.graph, d.classes, std::vector<std::vector<int>>(out.graph.num_edges()));
  }
  out.features = load_or_generate_features(d, out.graph, feature_seed, out.feature_meta);
  out.pe = batch_pe(out.graph, compute_all(out.graph));
  return out;
}

struct LoadedModel {
  WhatsNet model;
  json metadata;
};

LoadedModel load_model(const std::string& path) {
  if (path.empty()) throw Error("--checkpoint is required");
  Checkpoint ck = load_checkpoint(path);
  return {WhatsNet(ck.config, std::move(ck.params)), json::parse(ck.metadata_json)};
}

// Rebuilds the training run's features unless the caller overrides them.
LoadedData load_data_for_checkpoint(DataFlags d, const WhatsNet& model, const json& meta, bool labels_required) {
  d.classes = model.config().num_classes;
  std::uint64_t seed = 0;
  if (meta.contains("features") && d.features.empty()) {
    const json& f = meta.at("features");
    if (f.at("source") == "file") {
      d.features = f.at("path").get<std::string>();
    } else {
      d.feature_dim = f.at("dim").get<std::size_t>();
      seed = f.at("seed").get<std::uint64_t>();
    }
  }
  LoadedData data = load_data(d, labels_required, seed);
  if (data.features.values.cols() != model.config().input_dim) {
    throw Error("features have " + std::to_string(data.features.values.cols()) + " columns, checkpoint expects " +
                std::to_string(model.config().input_dim));
  }
  return data;
}

json metrics_json(const Metrics& m) {
  return {{"micro_f1", m.micro_f1}, {"macro_f1", m.macro_f1}, {"avg_jsd", m.avg_jsd}};
}

std::vector<double> load_scores(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    auto end = line.find_last_not_of(" \t\r") + 1;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, value);
    if (ec != std::errc() || ptr != line.data() + end) {
      throw Error(path + ":" + std::to_string(line_no) + ": expected one real per line");
    }
    scores.push_back(value);
  }
  if (scores.size() != n) {
    throw Error(path + ": " + std::to_string(scores.size()) + " scores for " + std::to_string(n) + " nodes");
  }
  return scores;
}

// Fills the unlabeled pairs of `pair_labels` from a predict TSV.
void apply_predictions(const std::string& path, const Hypergraph& h, int classes, std::vector<int>& pair_labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("edge_id", 0) == 0) continue;
    std::istringstream row(line);
    long long e = -1;
    long long v = -1;
    int y = -1;
    std::string extra;
    const std::string at = path + ":" + std::to_string(line_no);
    if (!(row >> e >> v >> y) || (row >> extra)) throw Error(at + ": expected edge_id node_id predicted_label");
    if (e < 0 || static_cast<std::size_t>(e) >= h.num_edges()) throw Error(at + ": hyperedge id out of range");
    if (y < 0 || y >= classes) throw Error(at + ": label out of range");
    const auto members = h.edge(static_cast<EdgeId>(e));
    const auto it = std::find(members.begin(), members.end(), static_cast<NodeId>(v));
    if (it == members.end()) throw Error(at + ": node " + std::to_string(v) + " not in hyperedge " + std::to_string(e));
    pair_labels[h.pair_offset(static_cast<EdgeId>(e)) + static_cast<std::size_t>(it - members.begin())] = y;
  }
}

}  // namespace

WhatsNetConfig ModelFlags::to_config(std::size_t input_dim, int num_classes) const {
  if (classifier != "concat" && classifier != "intermediate") {
    throw Error("--classifier must be concat or intermediate");
  }
  WhatsNetConfig c;
  c.num_layers = layers;
  c.input_dim = input_dim;
  c.hidden_dim = hidden_dim;
  c.final_dim = final_dim;
  c.inducing_points = inducing_points;
  c.heads = heads;
  c.dropout = dropout;
  c.num_classes = num_classes;
  c.sample_size = sample_size;
  c.use_pe = on(pe);
  c.use_within_att = on(within_att);
  c.classifier = classifier == "concat" ? ClassifierInput::kConcat : ClassifierInput::kIntermediate;
  c.validate();
  return c;
}

void run_synth(const SynthOptions& o) {
  const auto [h, labels] = generate_synthetic(o.synthetic);
  fs::create_directories(o.out);
  save_hypergraph(h, fs::path(o.out) / "hypergraph.txt");
  save_labels(h, labels, fs::path(o.out) / "labels.txt");
}

void run_features(const FeaturesOptions& o) {
  if (o.hypergraph.empty()) throw Error("--hypergraph is required");
  if (o.out.empty()) throw Error("--out is required");
  const Hypergraph h = load_hypergraph(o.hypergraph);
  if (o.source == "random") {
    save_features(random_features(h.num_nodes(), o.rw.dim, o.rw.seed), o.out);
  } else if (o.source == "rw") {
    save_features(rw_features(h, o.rw), o.out);
  } else {
    throw Error("--source must be random or rw");
  }
}

void run_centrality(const CentralityOptions& o) {
  if (o.hypergraph.empty()) throw Error("--hypergraph is required");
  if (o.out.empty()) throw Error("--out is required");
  save_centralities(compute_all(load_hypergraph(o.hypergraph)), o.out);
}

void run_train(const TrainOptions& o) {
  if (o.checkpoint.empty()) throw Error("--checkpoint is required");
  o.train.validate();
  const LoadedData data = load_data(o.data, true, o.train.seed);
  const WhatsNetConfig config = o.model.to_config(data.features.values.cols(), o.data.classes);
  const Split split = split_edges(data.labels.labeled_edges(), kSplitRatios, o.data.split_seed);

  TrainReport report;
  std::optional<WhatsNet> model;
  json extra;
  if (o.grid) {
    GridResult g = grid_search(data.dataset(), split, config, o.train, GridSpec{});
    json candidates = json::array();
    for (std::size_t i = 0; i < g.candidates.size(); ++i) {
      candidates.push_back({{"learning_rate", g.candidates[i].learning_rate},
                            {"batch_size", g.candidates[i].batch_size},
                            {"val", metrics_json(g.val[i])}});
    }
    extra = {{"candidates", candidates}, {"best_index", g.best_index}, {"test", metrics_json(g.test)}};
    report = std::move(g.best.report);
    model.emplace(std::move(g.best.model));
  } else {
    TrainResult r = train(data.dataset(), split, config, o.train);
    report = std::move(r.report);
    model.emplace(std::move(r.model));
  }
  report.checkpoint_path = o.checkpoint;

  const json metadata{{"split_seed", o.data.split_seed},
                      {"split_ratios", kSplitRatios},
                      {"features", data.feature_meta},
                      {"train_seed", report.train_config.seed},
                      {"learning_rate", report.train_config.learning_rate},
                      {"batch_size", report.train_config.batch_size},
                      {"best_epoch", report.best_epoch},
                      {"best_val", metrics_json(report.best_val)}};
  save_checkpoint(o.checkpoint, *model, metadata.dump());

  json report_json = json::parse(report.to_json());
  if (o.grid) report_json["grid"] = extra;
  with_output(o.checkpoint + ".report.json", [&](std::ostream& out) { out << report_json.dump(2) << '\n'; });
  std::cout << json{{"best_epoch", report.best_epoch}, {"best_val", metrics_json(report.best_val)}}.dump() << '\n';
}

void run_eval(const EvalOptions& o) {
  const LoadedModel loaded = load_model(o.checkpoint);
  const LoadedData data = load_data_for_checkpoint(o.data, loaded.model, loaded.metadata, true);
  const std::uint64_t split_seed = o.split_seed.value_or(loaded.metadata.value("split_seed", std::uint64_t{0}));
  const Split split = split_edges(data.labels.labeled_edges(), kSplitRatios, split_seed);
  const std::vector<EdgeId>* edges = nullptr;
  if (o.split == "train") {
    edges = &split.train;
  } else if (o.split == "val") {
    edges = &split.val;
  } else if (o.split == "test") {
    edges = &split.test;
  } else {
    throw Error("--split must be train, val or test");
  }
  const PredictionSet preds = predict_edges(loaded.model, data.dataset(), *edges);
  if (preds.empty()) throw Error("split '" + o.split + "' has no labeled pairs");
  const Metrics m = evaluate(preds, loaded.model.config().num_classes);
  json out = metrics_json(m);
  out["format_version"] = 1;
  out["split"] = o.split;
  out["pairs"] = preds.size();
  with_output(o.out, [&](std::ostream& s) { s << out.dump() << '\n'; });
}

void run_predict(const PredictOptions& o) {
  const LoadedModel loaded = load_model(o.checkpoint);
  const LoadedData data = load_data_for_checkpoint(o.data, loaded.model, loaded.metadata, false);
  const EmbeddingState state = loaded.model.embed(data.dataset().inputs(), kEvalSampleSeed);
  with_output(o.out, [&](std::ostream& out) {
    out << "# whatsnet predictions format_version 1\n";
    out << "edge_id\tnode_id\tpredicted_label\n";
    for (std::size_t e = 0; e < data.graph.num_edges(); ++e) {
      const auto id = static_cast<EdgeId>(e);
      if (data.labels.is_labeled(id)) continue;
      for (std::size_t k = 0; k < data.graph.edge_size(id); ++k) {
        const PairId p = data.graph.pair_offset(id) + static_cast<PairId>(k);
        out << e << '\t' << data.graph.pair_node(p) << '\t' << loaded.model.predict_pair(data.graph, p, state).label
            << '\n';
      }
    }
  });
}

void run_rank(const RankOptions& o) {
  if (o.hypergraph.empty()) throw Error("--hypergraph is required");
  if (o.weights.empty()) throw Error("--weights is required");
  if (o.labels.empty() && o.predictions.empty()) throw Error("--labels or --predictions is required");
  const LabelWeightMap map = parse_weight_map(o.weights);
  const Hypergraph h = load_hypergraph(o.hypergraph);
  std::vector<int> pair_labels(h.total_size(), EdgeDependentLabels::kUnlabeled);
  if (!o.labels.empty()) pair_labels = load_labels(o.labels, h, o.classes).pair_labels();
  if (!o.predictions.empty()) apply_predictions(o.predictions, h, o.classes, pair_labels);

  RankingOptions options;
  options.alpha = o.alpha;
  const RankingResult r = stationary(h, labels_to_weights(h, pair_labels, map), options);
  std::optional<double> accuracy;
  if (!o.ground_truth.empty()) accuracy = pairwise_accuracy(r.stationary, load_scores(o.ground_truth, h.num_nodes()));

  with_output(o.out, [&](std::ostream& out) {
    out << "# whatsnet ranking format_version 1\n";
    out << "rank\tnode\tstationary_probability\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.ranking.size(); ++i) {
      out << i + 1 << '\t' << r.ranking[i] << '\t' << r.stationary[r.ranking[i]] << '\n';
    }
  });
  json summary{{"alpha", r.alpha}, {"restart_forced", r.restart_forced}, {"iterations", r.iterations}};
  if (accuracy) summary["pairwise_accuracy"] = *accuracy;
  (o.out.empty() ? std::cerr : std::cout) << summary.dump() << '\n';
}

}  // namespace whatsnet::cli
