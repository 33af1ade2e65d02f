#include "whatsnet/rank.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <numeric>

#include "whatsnet/error.hpp"

namespace whatsnet {

LabelWeightMap parse_weight_map(const std::string& text) {
  LabelWeightMap map;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(pos, end - pos);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw Error("weight map entry '" + item + "' is not label:weight");
    int label = 0;
    double weight = 0.0;
    const char* first = item.data();
    auto r1 = std::from_chars(first, first + colon, label);
    auto r2 = std::from_chars(first + colon + 1, first + item.size(), weight);
    if (r1.ec != std::errc() || r1.ptr != first + colon || r2.ec != std::errc() || r2.ptr != first + item.size()) {
      throw Error("weight map entry '" + item + "' is not label:weight");
    }
    if (label < 0) throw Error("weight map: negative label " + std::to_string(label));
    if (!(weight > 0.0) || !std::isfinite(weight)) throw Error("weight map: weight for label " + std::to_string(label) + " must be positive");
    if (!map.emplace(label, weight).second) throw Error("weight map: duplicate label " + std::to_string(label));
    pos = end + 1;
  }
  return map;
}

EdgeDependentWeights labels_to_weights(const Hypergraph& h, std::span<const int> pair_labels,
                                       const LabelWeightMap& map) {
  if (pair_labels.size() != h.total_size()) throw Error("labels_to_weights: one label per membership pair required");
  for (const auto& [label, weight] : map) {
    if (!(weight > 0.0)) throw Error("labels_to_weights: weight for label " + std::to_string(label) + " must be positive");
  }
  EdgeDependentWeights out;
  out.pair_weights.reserve(pair_labels.size());
  for (std::size_t p = 0; p < pair_labels.size(); ++p) {
    const int y = pair_labels[p];
    if (y < 0) {
      throw Error("labels_to_weights: node " + std::to_string(h.pair_node(static_cast<PairId>(p))) +
                  " in hyperedge " + std::to_string(h.pair_edge(static_cast<PairId>(p))) + " is unlabeled");
    }
    auto it = map.find(y);
    if (it == map.end()) throw Error("labels_to_weights: label " + std::to_string(y) + " missing from weight map");
    out.pair_weights.push_back(it->second);
  }
  return out;
}

namespace {

void check_weights(const Hypergraph& h, const EdgeDependentWeights& w) {
  if (w.pair_weights.size() != h.total_size()) throw Error("one weight per membership pair required");
  for (double x : w.pair_weights) {
    if (!(x > 0.0) || !std::isfinite(x)) throw Error("edge-dependent weights must be positive and finite");
  }
}

std::vector<double> edge_weight_sums(const Hypergraph& h, const EdgeDependentWeights& w) {
  std::vector<double> sums(h.num_edges(), 0.0);
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    for (std::size_t i = 0; i < h.edge_size(id); ++i) sums[e] += w.pair_weights[h.pair_offset(id) + i];
  }
  return sums;
}

std::size_t find(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

bool connected(const Hypergraph& h) {
  std::vector<std::size_t> parent(h.num_nodes());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto members = h.edge(static_cast<EdgeId>(e));
    const std::size_t root = find(parent, static_cast<std::size_t>(members[0]));
    for (NodeId v : members) parent[find(parent, static_cast<std::size_t>(v))] = root;
  }
  std::size_t components = 0;
  for (std::size_t v = 0; v < h.num_nodes(); ++v) {
    if (h.degree(static_cast<NodeId>(v)) > 0 && find(parent, v) == v) ++components;
  }
  return components <= 1;
}

}  // namespace

std::vector<double> transition_matrix(const Hypergraph& h, const EdgeDependentWeights& weights) {
  check_weights(h, weights);
  const std::size_t n = h.num_nodes();
  const auto sums = edge_weight_sums(h, weights);
  std::vector<double> p(n * n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto incident = h.incident(static_cast<NodeId>(v));
    for (EdgeId e : incident) {
      const auto members = h.edge(e);
      for (std::size_t i = 0; i < members.size(); ++i) {
        const double w = weights.pair_weights[h.pair_offset(e) + i];
        p[v * n + static_cast<std::size_t>(members[i])] += w / (sums[e] * static_cast<double>(incident.size()));
      }
    }
  }
  return p;
}

RankingResult stationary(const Hypergraph& h, const EdgeDependentWeights& weights, const RankingOptions& options) {
  check_weights(h, weights);
  if (!(options.alpha >= 0.0 && options.alpha < 1.0)) throw Error("restart alpha must lie in [0, 1)");
  const std::size_t n = h.num_nodes();
  std::size_t active = 0;
  for (std::size_t v = 0; v < n; ++v) active += h.degree(static_cast<NodeId>(v)) > 0 ? 1 : 0;
  if (active == 0) throw Error("stationary: hypergraph has no hyperedges");

  RankingResult result;
  result.alpha = options.alpha;
  if (options.alpha == 0.0 && !connected(h)) {
    std::cerr << "warning: random walk is reducible; using restart alpha = 0.05\n";
    result.alpha = 0.05;
    result.restart_forced = true;
  }

  const auto sums = edge_weight_sums(h, weights);
  const double restart = 1.0 / static_cast<double>(active);
  std::vector<double> pi(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    if (h.degree(static_cast<NodeId>(v)) > 0) pi[v] = restart;
  }
  std::vector<double> next(n);
  std::vector<double> edge_mass(h.num_edges());
  for (result.iterations = 1; result.iterations <= options.max_iter; ++result.iterations) {
    std::fill(edge_mass.begin(), edge_mass.end(), 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      const auto incident = h.incident(static_cast<NodeId>(v));
      if (incident.empty()) continue;
      const double share = pi[v] / static_cast<double>(incident.size());
      for (EdgeId e : incident) edge_mass[e] += share;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t e = 0; e < h.num_edges(); ++e) {
      const auto id = static_cast<EdgeId>(e);
      const auto members = h.edge(id);
      const double scale = (1.0 - result.alpha) * edge_mass[e] / sums[e];
      for (std::size_t i = 0; i < members.size(); ++i) {
        next[members[i]] += scale * weights.pair_weights[h.pair_offset(id) + i];
      }
    }
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (h.degree(static_cast<NodeId>(v)) > 0) next[v] += result.alpha * restart;
      diff += std::abs(next[v] - pi[v]);
    }
    pi.swap(next);
    if (diff < options.tol) break;
  }
  result.iterations = std::min(result.iterations, options.max_iter);
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& x : pi) x /= total;
  result.stationary = std::move(pi);
  result.ranking.resize(n);
  std::iota(result.ranking.begin(), result.ranking.end(), 0);
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [&](NodeId a, NodeId b) { return result.stationary[a] > result.stationary[b]; });
  return result;
}

double pairwise_accuracy(std::span<const double> scores, std::span<const double> ground_truth) {
  if (scores.size() != ground_truth.size()) throw Error("pairwise_accuracy: score vectors differ in length");
  double agree = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = i + 1; j < scores.size(); ++j) {
      if (ground_truth[i] == ground_truth[j]) continue;
      ++pairs;
      if (scores[i] == scores[j]) {
        agree += 0.5;
      } else if ((scores[i] > scores[j]) == (ground_truth[i] > ground_truth[j])) {
        agree += 1.0;
      }
    }
  }
  return pairs == 0 ? 1.0 : agree / static_cast<double>(pairs);
}

}  // namespace whatsnet
