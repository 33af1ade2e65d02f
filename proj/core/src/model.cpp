#include "whatsnet/model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "config_json.hpp"
#include "json.hpp"
#include "seeding.hpp"
#include "whatsnet/error.hpp"

namespace whatsnet {

using ad::Segments;
using ad::Tensor;
using ad::Var;
using nlohmann::json;

namespace {

std::string v2e(std::size_t layer) { return layer_prefix(layer) + ".v2e"; }
std::string e2v(std::size_t layer) { return layer_prefix(layer) + ".e2v"; }
std::string att_prefix(const std::string& direction, std::size_t k) { return direction + ".att" + std::to_string(k); }
std::string pe_name(const std::string& direction) { return direction + ".pe"; }
std::string agg_prefix(const std::string& direction) { return direction + ".agg"; }
std::string lift_x_name(std::size_t layer) { return layer_prefix(layer) + ".lift_x"; }
std::string lift_h_name(std::size_t layer) { return layer_prefix(layer) + ".lift_h"; }
const std::string kClassifierWeight = "classifier.weight";
const std::string kClassifierBias = "classifier.bias";

std::size_t row_of(const std::vector<std::int32_t>& rows, std::int32_t id, const char* what) {
  const std::int32_t r = rows[static_cast<std::size_t>(id)];
  if (r < 0) throw Error(std::string("forward plan is missing ") + what + " " + std::to_string(id));
  return static_cast<std::size_t>(r);
}

// Gathers PE rows of `pairs` into a constant (|pairs| x d_f) block.
Tensor pe_block(const PositionalEncodingTable& pe, std::span<const PairId> pairs) {
  Tensor t(pairs.size(), kNumCentralities);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto row = pe.row(pairs[i]);
    std::copy(row.begin(), row.end(), t.row(i).begin());
  }
  return t;
}

}  // namespace

namespace {

const char* classifier_name(ClassifierInput c) { return c == ClassifierInput::kConcat ? "concat" : "intermediate"; }

ClassifierInput classifier_from_name(const std::string& s) {
  if (s == "concat") return ClassifierInput::kConcat;
  if (s == "intermediate") return ClassifierInput::kIntermediate;
  throw Error("unknown classifier input: " + s);
}

}  // namespace

namespace detail {

json config_to_json(const WhatsNetConfig& c) {
  return json{{"num_layers", c.num_layers},
              {"input_dim", c.input_dim},
              {"hidden_dim", c.hidden_dim},
              {"final_dim", c.final_dim},
              {"heads", c.heads},
              {"inducing_points", c.inducing_points},
              {"att_stack", c.att_stack},
              {"dropout", c.dropout},
              {"num_classes", c.num_classes},
              {"sample_size", c.sample_size},
              {"use_pe", c.use_pe},
              {"use_within_att", c.use_within_att},
              {"classifier", classifier_name(c.classifier)}};
}

WhatsNetConfig config_from_json(const json& j) {
  WhatsNetConfig c;
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.final_dim = j.at("final_dim").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.inducing_points = j.at("inducing_points").get<std::size_t>();
  c.att_stack = j.at("att_stack").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.num_classes = j.at("num_classes").get<int>();
  c.sample_size = j.at("sample_size").get<std::size_t>();
  c.use_pe = j.at("use_pe").get<bool>();
  c.use_within_att = j.at("use_within_att").get<bool>();
  c.classifier = classifier_from_name(j.at("classifier").get<std::string>());
  return c;
}

}  // namespace detail

std::string layer_prefix(std::size_t layer) { return "layer" + std::to_string(layer); }

std::size_t WhatsNetConfig::width(std::size_t layer) const {
  if (layer == 0) return input_dim;
  return layer == num_layers ? final_dim : hidden_dim;
}

bool WhatsNetConfig::layer_uses_pe(std::size_t layer) const {
  return use_pe && !(classifier == ClassifierInput::kIntermediate && layer == num_layers);
}

void WhatsNetConfig::validate() const {
  if (num_layers < 1) throw Error("config: at least one layer required");
  if (input_dim < 1) throw Error("config: input dimension must be positive");
  if (heads < 1) throw Error("config: at least one head required");
  for (std::size_t l = 1; l <= num_layers; ++l) {
    if (width(l) == 0 || width(l) % heads != 0) {
      throw Error("config: layer " + std::to_string(l) + " width " + std::to_string(width(l)) +
                  " not divisible by " + std::to_string(heads) + " heads");
    }
  }
  if (inducing_points < 1) throw Error("config: at least one inducing point required");
  if (use_within_att && att_stack < 1) throw Error("config: within-attention stack must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("config: dropout must lie in [0, 1)");
  if (num_classes < 1) throw Error("config: at least one class required");
}

std::vector<PairId> sample_incident_pairs(const Hypergraph& h, NodeId v, std::size_t sample_size,
                                          std::uint64_t sample_seed) {
  auto pairs = h.incident_pairs(v);
  std::vector<PairId> out(pairs.begin(), pairs.end());
  if (sample_size == 0 || sample_size >= out.size()) return out;
  std::mt19937_64 rng(detail::derive_seed(sample_seed, static_cast<std::uint64_t>(v)));
  // Partial Fisher-Yates, then restore increasing hyperedge order.
  for (std::size_t i = 0; i < sample_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, out.size() - 1);
    std::swap(out[i], out[pick(rng)]);
  }
  out.resize(sample_size);
  std::sort(out.begin(), out.end());
  return out;
}

ForwardPlan ForwardPlan::full(const Hypergraph& h, const WhatsNetConfig& config, std::uint64_t sample_seed) {
  ForwardPlan plan;
  std::vector<NodeId> all_nodes(h.num_nodes());
  std::iota(all_nodes.begin(), all_nodes.end(), 0);
  std::vector<EdgeId> all_edges(h.num_edges());
  std::iota(all_edges.begin(), all_edges.end(), 0);
  plan.nodes.assign(config.num_layers + 1, all_nodes);
  plan.edges.assign(config.num_layers + 1, all_edges);
  plan.node_pairs.resize(h.num_nodes());
  for (NodeId v : all_nodes) plan.node_pairs[v] = sample_incident_pairs(h, v, config.sample_size, sample_seed);
  return plan;
}

ForwardPlan ForwardPlan::for_pairs(const Hypergraph& h, const WhatsNetConfig& config, std::span<const PairId> pairs,
                                   std::uint64_t sample_seed) {
  const std::size_t L = config.num_layers;
  ForwardPlan plan;
  plan.nodes.resize(L + 1);
  plan.edges.resize(L + 1);
  plan.node_pairs.resize(h.num_nodes());
  std::vector<char> sampled(h.num_nodes(), 0);

  auto sorted_unique = [](auto& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  };
  auto add_incident = [&](const std::vector<NodeId>& nodes, std::vector<EdgeId>& edges) {
    for (NodeId v : nodes) {
      if (!sampled[v]) {
        plan.node_pairs[v] = sample_incident_pairs(h, v, config.sample_size, sample_seed);
        sampled[v] = 1;
      }
      for (PairId p : plan.node_pairs[v]) edges.push_back(h.pair_edge(p));
    }
  };

  for (PairId p : pairs) {
    plan.nodes[L].push_back(h.pair_node(p));
    plan.edges[L].push_back(h.pair_edge(p));
  }
  sorted_unique(plan.nodes[L]);
  add_incident(plan.nodes[L], plan.edges[L]);
  sorted_unique(plan.edges[L]);
  for (std::size_t l = L; l-- > 0;) {
    plan.nodes[l] = plan.nodes[l + 1];
    for (EdgeId e : plan.edges[l + 1]) {
      for (NodeId v : h.edge(e)) plan.nodes[l].push_back(v);
    }
    sorted_unique(plan.nodes[l]);
    plan.edges[l] = plan.edges[l + 1];
    if (l >= 1) add_incident(plan.nodes[l], plan.edges[l]);
    sorted_unique(plan.edges[l]);
  }
  return plan;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw Error("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

Tensor init_hyperedge_embeddings(const Hypergraph& h, const Tensor& features) {
  if (features.rows() != h.num_nodes()) throw Error("feature rows do not match node count");
  Tensor out(h.num_edges(), features.cols());
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto members = h.edge(static_cast<EdgeId>(e));
    auto row = out.row(e);
    for (NodeId v : members) {
      auto src = features.row(static_cast<std::size_t>(v));
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (double& x : row) x *= inv;
  }
  return out;
}

WhatsNet::WhatsNet(WhatsNetConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  register_params(seed);
}

WhatsNet::WhatsNet(WhatsNetConfig config, ad::ParamStore params) : config_(std::move(config)) {
  config_.validate();
  register_params(0);
  const auto& expected = params_.params();
  const auto& given = params.params();
  for (const auto& [name, p] : expected) {
    auto it = given.find(name);
    if (it == given.end()) throw Error("checkpoint is missing parameter " + name);
    if (it->second.value.rows() != p.value.rows() || it->second.value.cols() != p.value.cols()) {
      throw Error("parameter " + name + " has shape " + std::to_string(it->second.value.rows()) + "x" +
                  std::to_string(it->second.value.cols()) + ", config expects " + std::to_string(p.value.rows()) +
                  "x" + std::to_string(p.value.cols()));
    }
  }
  for (const auto& [name, p] : given) {
    if (!expected.contains(name)) throw Error("checkpoint has unexpected parameter " + name);
  }
  params_ = std::move(params);
}

void WhatsNet::register_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& c = config_;
  for (std::size_t l = 1; l <= c.num_layers; ++l) {
    const std::size_t d = c.width(l);
    if (c.width(l - 1) != d) {
      params_.add(lift_x_name(l), ad::xavier_uniform(c.width(l - 1), d, rng));
      params_.add(lift_h_name(l), ad::xavier_uniform(c.width(l - 1), d, rng));
    }
    for (const std::string& dir : {v2e(l), e2v(l)}) {
      if (c.layer_uses_pe(l)) params_.add(pe_name(dir), ad::xavier_uniform(kNumCentralities, d, rng));
      if (c.use_within_att) {
        for (std::size_t k = 0; k < c.att_stack; ++k) {
          register_within_att(params_, att_prefix(dir, k), d, c.inducing_points, rng);
        }
      }
      register_mab(params_, agg_prefix(dir), d, rng);
    }
  }
  const std::size_t d_last = c.width(c.num_layers);
  const std::size_t classifier_in = c.classifier == ClassifierInput::kConcat ? 2 * d_last : d_last;
  const auto classes = static_cast<std::size_t>(c.num_classes);
  params_.add(kClassifierWeight, ad::xavier_uniform(classifier_in, classes, rng));
  params_.add(kClassifierBias, Tensor(1, classes));
}

Var WhatsNet::lift(ForwardContext& ctx, const std::string& name, Var x) const {
  return ad::matmul(x, ctx.param(name));
}

LayerState WhatsNet::input_state(ad::Tape& tape, const ModelInputs& in, const ForwardPlan& plan) const {
  const Hypergraph& h = in.graph;
  if (in.features.rows() != h.num_nodes() || in.features.cols() != config_.input_dim) {
    throw Error("features must be " + std::to_string(h.num_nodes()) + "x" + std::to_string(config_.input_dim));
  }
  if (in.pe.num_pairs != h.total_size()) throw Error("positional encoding table does not match hypergraph");
  LayerState s;
  s.node_row.assign(h.num_nodes(), -1);
  s.edge_row.assign(h.num_edges(), -1);
  const std::size_t d = in.features.cols();
  Tensor x(plan.nodes[0].size(), d);
  for (std::size_t i = 0; i < plan.nodes[0].size(); ++i) {
    const NodeId v = plan.nodes[0][i];
    auto src = in.features.row(static_cast<std::size_t>(v));
    std::copy(src.begin(), src.end(), x.row(i).begin());
    s.node_row[v] = static_cast<std::int32_t>(i);
  }
  Tensor hm(plan.edges[0].size(), d);
  for (std::size_t i = 0; i < plan.edges[0].size(); ++i) {
    const EdgeId e = plan.edges[0][i];
    const auto members = h.edge(e);
    auto row = hm.row(i);
    for (NodeId v : members) {
      auto src = in.features.row(static_cast<std::size_t>(v));
      for (std::size_t c = 0; c < d; ++c) row[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (double& a : row) a *= inv;
    s.edge_row[e] = static_cast<std::int32_t>(i);
  }
  s.x = tape.constant(std::move(x));
  s.h = tape.constant(std::move(hm));
  return s;
}

LayerState WhatsNet::update_hyperedges(ForwardContext& ctx, std::size_t layer, const ModelInputs& in,
                                       const LayerState& prev, const ForwardPlan& plan) const {
  const Hypergraph& h = in.graph;
  const auto& edges = plan.edges[layer];
  const std::string dir = v2e(layer);
  if (prev.x.cols() != config_.width(layer)) throw Error("update_hyperedges: input width does not match layer");

  Segments segments;
  std::vector<std::size_t> member_rows;
  std::vector<PairId> pairs;
  std::vector<std::size_t> query_rows;
  LayerState next;
  next.pair_row.assign(h.total_size(), -1);
  next.edge_row.assign(h.num_edges(), -1);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const EdgeId e = edges[i];
    const auto members = h.edge(e);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const PairId p = h.pair_offset(e) + static_cast<PairId>(k);
      next.pair_row[p] = static_cast<std::int32_t>(pairs.size());
      pairs.push_back(p);
      member_rows.push_back(row_of(prev.node_row, members[k], "node"));
    }
    segments.push(members.size());
    query_rows.push_back(row_of(prev.edge_row, e, "hyperedge"));
    next.edge_row[e] = static_cast<std::int32_t>(i);
  }

  Var v = ad::gather_rows(prev.x, member_rows);
  if (config_.layer_uses_pe(layer)) {
    v = ad::add(v, ad::matmul(ctx.tape.constant(pe_block(in.pe, pairs)), ctx.param(pe_name(dir))));
  }
  if (config_.use_within_att) {
    for (std::size_t k = 0; k < config_.att_stack; ++k) v = within_att(ctx, att_prefix(dir, k), v, segments);
  }
  Var queries = ad::gather_rows(prev.h, query_rows);
  next.h = mab(ctx, agg_prefix(dir), queries, v, Segments::uniform(edges.size(), 1), segments);
  next.intermediate = v;
  return next;
}

void WhatsNet::update_nodes(ForwardContext& ctx, std::size_t layer, const ModelInputs& in, const LayerState& prev,
                            LayerState& next, const ForwardPlan& plan) const {
  const Hypergraph& h = in.graph;
  const auto& nodes = plan.nodes[layer];
  const std::string dir = e2v(layer);

  Segments segments;
  std::vector<std::size_t> edge_rows;
  std::vector<PairId> pairs;
  std::vector<std::size_t> query_rows;
  std::vector<std::size_t> active_index(nodes.size(), 0);
  std::vector<char> active(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& incident = plan.node_pairs[static_cast<std::size_t>(nodes[i])];
    if (incident.empty()) continue;
    active[i] = 1;
    active_index[i] = query_rows.size();
    for (PairId p : incident) {
      pairs.push_back(p);
      edge_rows.push_back(row_of(next.edge_row, h.pair_edge(p), "hyperedge"));
    }
    segments.push(incident.size());
    query_rows.push_back(row_of(prev.node_row, nodes[i], "node"));
  }

  const std::size_t num_active = query_rows.size();
  Var combined = prev.x;
  if (num_active > 0) {
    Var e = ad::gather_rows(next.h, edge_rows);
    if (config_.layer_uses_pe(layer)) {
      e = ad::add(e, ad::matmul(ctx.tape.constant(pe_block(in.pe, pairs)), ctx.param(pe_name(dir))));
    }
    if (config_.use_within_att) {
      for (std::size_t k = 0; k < config_.att_stack; ++k) e = within_att(ctx, att_prefix(dir, k), e, segments);
    }
    Var queries = ad::gather_rows(prev.x, query_rows);
    Var updated = mab(ctx, agg_prefix(dir), queries, e, Segments::uniform(num_active, 1), segments);
    combined = ad::concat_rows(updated, prev.x);
  }

  std::vector<std::size_t> order(nodes.size());
  next.node_row.assign(h.num_nodes(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    order[i] = active[i] ? active_index[i] : num_active + row_of(prev.node_row, nodes[i], "node");
    next.node_row[nodes[i]] = static_cast<std::int32_t>(i);
  }
  next.x = ad::gather_rows(combined, order);
}

LayerState WhatsNet::forward(ForwardContext& ctx, const ModelInputs& in, const ForwardPlan& plan) const {
  if (plan.nodes.size() != config_.num_layers + 1 || plan.edges.size() != config_.num_layers + 1) {
    throw Error("forward plan depth does not match the number of layers");
  }
  if (ctx.heads != config_.heads) throw Error("forward context head count does not match config");
  LayerState state = input_state(ctx.tape, in, plan);
  for (std::size_t l = 1; l <= config_.num_layers; ++l) {
    if (config_.width(l - 1) != config_.width(l)) {
      state.x = lift(ctx, lift_x_name(l), state.x);
      state.h = lift(ctx, lift_h_name(l), state.h);
    }
    LayerState next = update_hyperedges(ctx, l, in, state, plan);
    update_nodes(ctx, l, in, state, next, plan);
    state = std::move(next);
  }
  return state;
}

Var WhatsNet::pair_logits(ForwardContext& ctx, const ModelInputs& in, const LayerState& state,
                          std::span<const PairId> pairs) const {
  const Hypergraph& h = in.graph;
  Var features;
  if (config_.classifier == ClassifierInput::kConcat) {
    std::vector<std::size_t> node_rows;
    std::vector<std::size_t> edge_rows;
    node_rows.reserve(pairs.size());
    edge_rows.reserve(pairs.size());
    for (PairId p : pairs) {
      node_rows.push_back(row_of(state.node_row, h.pair_node(p), "node"));
      edge_rows.push_back(row_of(state.edge_row, h.pair_edge(p), "hyperedge"));
    }
    features = ad::concat_cols(ad::gather_rows(state.x, node_rows), ad::gather_rows(state.h, edge_rows));
  } else {
    if (!state.intermediate) throw Error("intermediate embeddings unavailable");
    std::vector<std::size_t> rows;
    rows.reserve(pairs.size());
    for (PairId p : pairs) rows.push_back(row_of(state.pair_row, p, "pair"));
    features = ad::gather_rows(*state.intermediate, rows);
  }
  return ad::broadcast_row_add(ad::matmul(features, ctx.param(kClassifierWeight)), ctx.param(kClassifierBias));
}

EmbeddingState WhatsNet::embed(const ModelInputs& in, std::uint64_t sample_seed) const {
  ad::Tape tape;
  std::mt19937_64 rng(0);
  // Eval mode never records gradients, so the store is only read.
  ForwardContext ctx{tape, const_cast<ad::ParamStore&>(params_), config_.heads, config_.dropout, false, rng};
  const ForwardPlan plan = ForwardPlan::full(in.graph, config_, sample_seed);
  LayerState state = forward(ctx, in, plan);
  EmbeddingState out;
  out.x = state.x.value();
  out.h = state.h.value();
  if (state.intermediate) out.intermediate = state.intermediate->value();
  return out;
}

namespace {

PairId find_pair(const Hypergraph& h, NodeId v, EdgeId e) {
  if (e < 0 || static_cast<std::size_t>(e) >= h.num_edges()) throw Error("hyperedge id out of range");
  const auto members = h.edge(e);
  auto it = std::find(members.begin(), members.end(), v);
  if (it == members.end()) {
    throw Error("node " + std::to_string(v) + " is not a member of hyperedge " + std::to_string(e));
  }
  return h.pair_offset(e) + static_cast<PairId>(it - members.begin());
}

Prediction linear_classify(const ad::ParamStore& params, std::span<const double> a, std::span<const double> b) {
  const Tensor& w = params.get(kClassifierWeight).value;
  const Tensor& bias = params.get(kClassifierBias).value;
  if (a.size() + b.size() != w.rows()) throw Error("classifier input width mismatch");
  Prediction out;
  out.logits.assign(bias.values().begin(), bias.values().end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t c = 0; c < w.cols(); ++c) out.logits[c] += a[i] * w(i, c);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t c = 0; c < w.cols(); ++c) out.logits[c] += b[i] * w(a.size() + i, c);
  }
  out.label = argmax(out.logits);
  return out;
}

}  // namespace

Prediction WhatsNet::classify(const Hypergraph& h, NodeId v, EdgeId e, const EmbeddingState& state) const {
  if (config_.classifier != ClassifierInput::kConcat) throw Error("classify: model uses the intermediate classifier");
  find_pair(h, v, e);
  return linear_classify(params_, state.x.row(static_cast<std::size_t>(v)), state.h.row(static_cast<std::size_t>(e)));
}

Prediction WhatsNet::classify_intermediate(const Hypergraph& h, NodeId v, EdgeId e,
                                           const EmbeddingState& state) const {
  if (config_.classifier != ClassifierInput::kIntermediate) {
    throw Error("classify_intermediate: model was built for the concatenation classifier");
  }
  const PairId p = find_pair(h, v, e);
  return linear_classify(params_, state.intermediate.row(static_cast<std::size_t>(p)), {});
}

Prediction WhatsNet::predict_pair(const Hypergraph& h, PairId p, const EmbeddingState& state) const {
  const NodeId v = h.pair_node(p);
  const EdgeId e = h.pair_edge(p);
  if (config_.classifier == ClassifierInput::kConcat) return classify(h, v, e, state);
  return linear_classify(params_, state.intermediate.row(static_cast<std::size_t>(p)), {});
}

void save_checkpoint(const std::filesystem::path& path, const WhatsNet& model, const std::string& metadata_json) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["config"] = detail::config_to_json(model.config());
  j["centrality_column_order"] = json::array();
  for (auto name : kCentralityNames) j["centrality_column_order"].push_back(std::string(name));
  json params = json::object();
  for (const auto& [name, p] : model.params().params()) {
    params[name] = json{{"shape", {p.value.rows(), p.value.cols()}}, {"data", p.value.values()}};
  }
  j["params"] = std::move(params);
  j["adam_steps"] = model.params().step_count();
  j["metadata"] = metadata_json.empty() ? json::object() : json::parse(metadata_json);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json j;
  try {
    in >> j;
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw Error("unsupported checkpoint format_version " + j.at("format_version").dump());
    }
    const auto order = j.at("centrality_column_order").get<std::vector<std::string>>();
    if (order.size() != kNumCentralities || !std::equal(order.begin(), order.end(), kCentralityNames.begin())) {
      throw Error("checkpoint centrality column order differs from degree,eigenvector,pagerank,coreness");
    }
    Checkpoint ck;
    ck.config = detail::config_from_json(j.at("config"));
    for (const auto& [name, p] : j.at("params").items()) {
      const auto shape = p.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2) throw Error("parameter " + name + ": shape must have two entries");
      ck.params.add(name, Tensor(shape[0], shape[1], p.at("data").get<std::vector<double>>()));
    }
    ck.params.set_step_count(j.value("adam_steps", std::int64_t{0}));
    ck.metadata_json = j.value("metadata", json::object()).dump();
    // Validates every shape against the config.
    WhatsNet probe(ck.config, ck.params);
    return ck;
  } catch (const json::exception& e) {
    throw Error(path.string() + ": malformed checkpoint: " + e.what());
  }
}

}  // namespace whatsnet
