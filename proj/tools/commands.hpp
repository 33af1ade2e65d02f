#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "whatsnet/features.hpp"
#include "whatsnet/hypergraph.hpp"
#include "whatsnet/model.hpp"
#include "whatsnet/train.hpp"

namespace whatsnet::cli {

struct SynthOptions {
  SyntheticOptions synthetic;
  std::string out = ".";
};

struct FeaturesOptions {
  std::string hypergraph;
  std::string source = "random";
  RandomWalkOptions rw;
  std::string out;
};

struct CentralityOptions {
  std::string hypergraph;
  std::string out;
};

// Model flags as typed on the command line; "on"/"off" switches stay strings
// until converted.
struct ModelFlags {
  std::size_t layers = 1;
  std::size_t hidden_dim = 64;
  std::size_t final_dim = 128;
  std::size_t inducing_points = 4;
  std::size_t heads = 4;
  double dropout = 0.7;
  std::string pe = "on";
  std::string within_att = "on";
  std::size_t sample_size = 0;
  std::string classifier = "concat";

  WhatsNetConfig to_config(std::size_t input_dim, int num_classes) const;
};

// Hypergraph, labels and features shared by train, eval and predict.
struct DataFlags {
  std::string hypergraph;
  std::string labels;
  std::string features;  // empty: random features
  std::size_t feature_dim = 64;
  int classes = 3;
  std::uint64_t split_seed = 0;
};

struct TrainOptions {
  DataFlags data;
  ModelFlags model;
  TrainConfig train;
  bool grid = false;
  std::string checkpoint;
};

struct EvalOptions {
  DataFlags data;
  std::string checkpoint;
  std::string split = "test";
  std::optional<std::uint64_t> split_seed;
  std::string out;  // empty: stdout
};

struct PredictOptions {
  DataFlags data;
  std::string checkpoint;
  std::string out;
};

struct RankOptions {
  std::string hypergraph;
  std::string labels;
  std::string predictions;
  std::string weights;
  int classes = 3;
  double alpha = 0.0;
  std::string ground_truth;
  std::string out;
};

void run_synth(const SynthOptions& o);
void run_features(const FeaturesOptions& o);
void run_centrality(const CentralityOptions& o);
void run_train(const TrainOptions& o);
void run_eval(const EvalOptions& o);
void run_predict(const PredictOptions& o);
void run_rank(const RankOptions& o);

}  // namespace whatsnet::cli
