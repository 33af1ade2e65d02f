#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "whatsnet/error.hpp"

namespace {

using namespace whatsnet::cli;

const auto kOnOff = CLI::IsMember({"on", "off"});

struct Command {
  CLI::App* app = nullptr;
  std::string config;
};

Command add_command(CLI::App& app, const std::string& name, const std::string& description) {
  Command c{app.add_subcommand(name, description), {}};
  // Merged by apply_config after parsing; flags win over the file.
  c.app->add_option("--config", c.config, "flat key=value file (one per line, # comments); flags override it");
  return c;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

// Each key names a flag of the command without its leading dashes.
void apply_config(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw whatsnet::Error("cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string at = path + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw whatsnet::Error(at + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = key == "config" ? nullptr : app->get_option_no_throw("--" + key);
    if (opt == nullptr) throw whatsnet::Error(at + ": unknown key '" + key + "' for " + app->get_name());
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void add_data_flags(CLI::App* sub, DataFlags& d) {
  sub->add_option("--hypergraph", d.hypergraph, "hypergraph file");
  sub->add_option("--labels", d.labels, "edge-dependent label file");
  sub->add_option("--features", d.features, "node feature file; random features when omitted");
}

void add_model_flags(CLI::App* sub, ModelFlags& m) {
  sub->add_option("--layers", m.layers, "number of WHATsNet layers")->capture_default_str();
  sub->add_option("--hidden-dim", m.hidden_dim, "width of all but the last layer")->capture_default_str();
  sub->add_option("--final-dim", m.final_dim, "width of the last layer")->capture_default_str();
  sub->add_option("--inducing-points", m.inducing_points, "inducing points per WithinATT block")
      ->capture_default_str();
  sub->add_option("--heads", m.heads, "attention heads")->capture_default_str();
  sub->add_option("--dropout", m.dropout, "dropout rate inside feed-forward layers")->capture_default_str();
  sub->add_option("--pe", m.pe, "WithinOrderPE (on|off)")->check(kOnOff)->capture_default_str();
  sub->add_option("--within-att", m.within_att, "WithinATT (on|off)")->check(kOnOff)->capture_default_str();
  sub->add_option("--sample-size", m.sample_size, "hyperedges sampled per node; 0 uses all")
      ->capture_default_str();
  sub->add_option("--classifier", m.classifier, "concat or intermediate")
      ->check(CLI::IsMember({"concat", "intermediate"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Edge-dependent node classification on hypergraphs", "whatsnet");
  app.require_subcommand(1);

  SynthOptions synth;
  Command synth_cmd = add_command(app, "synth", "write a synthetic hypergraph and labels");
  synth_cmd.app->add_option("--nodes", synth.synthetic.num_nodes, "number of nodes")->capture_default_str();
  synth_cmd.app->add_option("--edges", synth.synthetic.num_edges, "number of hyperedges")->capture_default_str();
  synth_cmd.app->add_option("--min-size", synth.synthetic.min_edge_size, "smallest hyperedge")->capture_default_str();
  synth_cmd.app->add_option("--max-size", synth.synthetic.max_edge_size, "largest hyperedge")->capture_default_str();
  synth_cmd.app->add_option("--classes", synth.synthetic.num_classes, "number of classes")->capture_default_str();
  synth_cmd.app->add_option("--seed", synth.synthetic.seed, "generator seed")->capture_default_str();
  synth_cmd.app->add_option("--out", synth.out, "output directory for hypergraph.txt and labels.txt")
      ->capture_default_str();

  FeaturesOptions features;
  Command features_cmd = add_command(app, "features", "write initial node features");
  features_cmd.app->add_option("--hypergraph", features.hypergraph, "hypergraph file");
  features_cmd.app->add_option("--source", features.source, "random or rw")
      ->check(CLI::IsMember({"random", "rw"}))
      ->capture_default_str();
  features_cmd.app->add_option("--dim", features.rw.dim, "feature dimension")->capture_default_str();
  features_cmd.app->add_option("--seed", features.rw.seed, "seed")->capture_default_str();
  features_cmd.app->add_option("--walk-length", features.rw.walk_length, "rw: nodes per walk")->capture_default_str();
  features_cmd.app->add_option("--walks-per-node", features.rw.walks_per_node, "rw: walks started per node")
      ->capture_default_str();
  features_cmd.app->add_option("--window", features.rw.window, "rw: skip-gram window")->capture_default_str();
  features_cmd.app->add_option("--negative", features.rw.negative_samples, "rw: negative samples per context")
      ->capture_default_str();
  features_cmd.app->add_option("--return-p", features.rw.p, "rw: return parameter p")->capture_default_str();
  features_cmd.app->add_option("--inout-q", features.rw.q, "rw: in-out parameter q")->capture_default_str();
  features_cmd.app->add_option("--rw-epochs", features.rw.epochs, "rw: skip-gram epochs")->capture_default_str();
  features_cmd.app->add_option("--out", features.out, "output feature file");

  CentralityOptions centrality;
  Command centrality_cmd = add_command(app, "centrality", "write the node centrality table");
  centrality_cmd.app->add_option("--hypergraph", centrality.hypergraph, "hypergraph file");
  centrality_cmd.app->add_option("--out", centrality.out, "output TSV");

  TrainOptions train;
  Command train_cmd = add_command(app, "train", "train a model and write a checkpoint and report");
  add_data_flags(train_cmd.app, train.data);
  train_cmd.app->add_option("--feature-dim", train.data.feature_dim, "dimension of generated random features")
      ->capture_default_str();
  train_cmd.app->add_option("--classes", train.data.classes, "number of classes")->capture_default_str();
  train_cmd.app->add_option("--split-seed", train.data.split_seed, "seed of the 60/20/20 edge split")
      ->capture_default_str();
  add_model_flags(train_cmd.app, train.model);
  train_cmd.app->add_option("--lr", train.train.learning_rate, "Adam learning rate")->capture_default_str();
  train_cmd.app->add_option("--batch-size", train.train.batch_size, "hyperedges per step")->capture_default_str();
  train_cmd.app->add_option("--max-epochs", train.train.max_epochs, "epoch limit")->capture_default_str();
  train_cmd.app->add_option("--patience", train.train.patience, "epochs without improvement before stopping")
      ->capture_default_str();
  train_cmd.app->add_option("--seed", train.train.seed, "seed of parameters, batches, dropout and sampling")
      ->capture_default_str();
  train_cmd.app->add_flag("--grid", train.grid, "search lr {1e-3,1e-4} x batch size {64,128}");
  train_cmd.app->add_option("--checkpoint", train.checkpoint, "output checkpoint; the report goes to <path>.report.json");

  EvalOptions eval;
  std::uint64_t eval_split_seed = 0;
  Command eval_cmd = add_command(app, "eval", "print metrics of a checkpoint on one split");
  add_data_flags(eval_cmd.app, eval.data);
  eval_cmd.app->add_option("--checkpoint", eval.checkpoint, "checkpoint file");
  eval_cmd.app->add_option("--split", eval.split, "train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  auto* eval_seed = eval_cmd.app->add_option("--split-seed", eval_split_seed, "split seed; defaults to the checkpoint's");
  eval_cmd.app->add_option("--out", eval.out, "output JSON file; stdout when omitted");

  PredictOptions predict;
  Command predict_cmd = add_command(app, "predict", "print predicted labels for unlabeled hyperedges");
  add_data_flags(predict_cmd.app, predict.data);
  predict_cmd.app->add_option("--checkpoint", predict.checkpoint, "checkpoint file");
  predict_cmd.app->add_option("--out", predict.out, "output TSV; stdout when omitted");

  RankOptions rank;
  Command rank_cmd = add_command(app, "rank", "rank nodes by a label-weighted hypergraph random walk");
  rank_cmd.app->add_option("--hypergraph", rank.hypergraph, "hypergraph file");
  rank_cmd.app->add_option("--labels", rank.labels, "edge-dependent label file");
  rank_cmd.app->add_option("--predictions", rank.predictions, "predict output filling unlabeled hyperedges");
  rank_cmd.app->add_option("--classes", rank.classes, "number of classes")->capture_default_str();
  rank_cmd.app->add_option("--weights", rank.weights, "label weights, e.g. 0:2,1:1,2:2");
  rank_cmd.app->add_option("--alpha", rank.alpha, "uniform restart probability")->capture_default_str();
  rank_cmd.app->add_option("--ground-truth", rank.ground_truth, "one score per node for pairwise accuracy");
  rank_cmd.app->add_option("--out", rank.out, "output TSV; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "whatsnet: error: " << e.what() << '\n';
    return 1;
  }

  try {
    for (const Command* c : {&synth_cmd, &features_cmd, &centrality_cmd, &train_cmd, &eval_cmd, &predict_cmd, &rank_cmd}) {
      if (*c->app && !c->config.empty()) apply_config(c->app, c->config);
    }
    if (*synth_cmd.app) run_synth(synth);
    if (*features_cmd.app) run_features(features);
    if (*centrality_cmd.app) run_centrality(centrality);
    if (*train_cmd.app) run_train(train);
    if (*eval_cmd.app) {
      if (*eval_seed) eval.split_seed = eval_split_seed;
      run_eval(eval);
    }
    if (*predict_cmd.app) run_predict(predict);
    if (*rank_cmd.app) run_rank(rank);
  } catch (const std::exception& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    std::cerr << "whatsnet: error: " << message << '\n';
    return 1;
  }
  return 0;
}
