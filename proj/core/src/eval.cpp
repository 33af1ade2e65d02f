#include "whatsnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "whatsnet/error.hpp"

namespace whatsnet {

double micro_f1(const PredictionSet& preds) {
  if (preds.empty()) throw Error("micro_f1 of an empty prediction set");
  std::size_t correct = 0;
  for (const auto& p : preds) correct += p.truth == p.predicted ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double macro_f1(const PredictionSet& preds) {
  if (preds.empty()) throw Error("macro_f1 of an empty prediction set");
  int classes = 0;
  for (const auto& p : preds) classes = std::max({classes, p.truth + 1, p.predicted + 1});
  std::vector<std::size_t> tp(classes, 0);
  std::vector<std::size_t> true_count(classes, 0);
  std::vector<std::size_t> pred_count(classes, 0);
  for (const auto& p : preds) {
    ++true_count[p.truth];
    ++pred_count[p.predicted];
    if (p.truth == p.predicted) ++tp[p.truth];
  }
  double total = 0.0;
  int present = 0;
  for (int c = 0; c < classes; ++c) {
    if (true_count[c] == 0 && pred_count[c] == 0) continue;
    ++present;
    total += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(true_count[c] + pred_count[c]);
  }
  return total / static_cast<double>(present);
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("jensen_shannon: distributions differ in length");
  auto kl_to_mid = [](double a, double m) { return a > 0.0 ? a * std::log2(a / m) : 0.0; };
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    js += 0.5 * kl_to_mid(p[i], m) + 0.5 * kl_to_mid(q[i], m);
  }
  return std::clamp(js, 0.0, 1.0);
}

double jsd_node_label_distributions(const PredictionSet& preds, int num_classes) {
  if (preds.empty()) return 0.0;
  const auto c = static_cast<std::size_t>(num_classes);
  std::map<NodeId, std::pair<std::vector<double>, std::vector<double>>> per_node;
  for (const auto& p : preds) {
    if (p.truth < 0 || p.truth >= num_classes || p.predicted < 0 || p.predicted >= num_classes) {
      throw Error("label outside [0, num_classes)");
    }
    auto [it, inserted] = per_node.try_emplace(p.node);
    if (inserted) {
      it->second.first.assign(c, 0.0);
      it->second.second.assign(c, 0.0);
    }
    it->second.first[p.truth] += 1.0;
    it->second.second[p.predicted] += 1.0;
  }
  double total = 0.0;
  for (auto& [node, dists] : per_node) {
    auto& [truth, predicted] = dists;
    double n = 0.0;
    for (double x : truth) n += x;
    for (std::size_t k = 0; k < c; ++k) {
      truth[k] /= n;
      predicted[k] /= n;
    }
    total += jensen_shannon(truth, predicted);
  }
  return total / static_cast<double>(per_node.size());
}

Metrics evaluate(const PredictionSet& preds, int num_classes) {
  return {micro_f1(preds), macro_f1(preds), jsd_node_label_distributions(preds, num_classes)};
}

PredictionSet truth_pairs(const Hypergraph& h, const EdgeDependentLabels& labels, std::span<const EdgeId> edges) {
  PredictionSet out;
  for (EdgeId e : edges) {
    if (!labels.is_labeled(e)) continue;
    const auto members = h.edge(e);
    for (std::size_t i = 0; i < members.size(); ++i) {
      out.push_back({members[i], e, labels.label(h.pair_offset(e) + static_cast<PairId>(i)), 0});
    }
  }
  return out;
}

PredictionSet baseline_uniform(PredictionSet pairs, int num_classes, std::uint64_t seed) {
  if (num_classes < 1) throw Error("baseline_uniform: need at least one class");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, num_classes - 1);
  for (auto& p : pairs) p.predicted = pick(rng);
  return pairs;
}

PredictionSet baseline_proportional(PredictionSet pairs, std::span<const double> frequencies, std::uint64_t seed) {
  if (frequencies.empty()) throw Error("baseline_proportional: need at least one class");
  double total = 0.0;
  for (double f : frequencies) {
    if (!(f >= 0.0)) throw Error("baseline_proportional: negative frequency");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("baseline_proportional: frequencies must sum to 1");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(frequencies.begin(), frequencies.end());
  for (auto& p : pairs) p.predicted = pick(rng);
  return pairs;
}

std::vector<double> label_frequencies(const Hypergraph& h, const EdgeDependentLabels& labels,
                                      std::span<const EdgeId> edges) {
  std::vector<double> freq(static_cast<std::size_t>(labels.num_classes()), 0.0);
  double n = 0.0;
  for (const auto& p : truth_pairs(h, labels, edges)) {
    freq[p.truth] += 1.0;
    n += 1.0;
  }
  if (n == 0.0) throw Error("no labeled pairs to count");
  for (double& f : freq) f /= n;
  return freq;
}

}  // namespace whatsnet
