#include "whatsnet/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "seeding.hpp"
#include "whatsnet/error.hpp"

namespace whatsnet {

FeatureMatrix random_features(std::size_t num_nodes, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix out{ad::Tensor(num_nodes, dim), FeatureSource::kRandom};
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = normal(rng);
  return out;
}

namespace {

bool share_edge(const Hypergraph& h, NodeId a, NodeId b) {
  auto ea = h.incident(a);
  auto eb = h.incident(b);
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i] == eb[j]) return true;
    if (ea[i] < eb[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

NodeId step(const Hypergraph& h, NodeId current, NodeId previous, const RandomWalkOptions& o, std::mt19937_64& rng,
            std::vector<NodeId>& candidates, std::vector<double>& weights) {
  auto incident = h.incident(current);
  std::uniform_int_distribution<std::size_t> pick_edge(0, incident.size() - 1);
  const auto members = h.edge(incident[pick_edge(rng)]);
  if (members.size() == 1) return current;
  candidates.clear();
  for (NodeId u : members) {
    if (u != current) candidates.push_back(u);
  }
  const bool unbiased = previous < 0 || (o.p == 1.0 && o.q == 1.0);
  if (unbiased) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
  }
  weights.clear();
  for (NodeId u : candidates) {
    if (u == previous) {
      weights.push_back(1.0 / o.p);
    } else if (share_edge(h, u, previous)) {
      weights.push_back(1.0);
    } else {
      weights.push_back(1.0 / o.q);
    }
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return candidates[pick(rng)];
}

double sigmoid(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

std::vector<std::vector<NodeId>> random_walks(const Hypergraph& h, const RandomWalkOptions& options) {
  if (!(options.p > 0.0) || !(options.q > 0.0)) throw Error("random walk p and q must be positive");
  if (options.walk_length == 0) throw Error("walk length must be positive");
  std::vector<std::vector<NodeId>> walks;
  std::vector<NodeId> candidates;
  std::vector<double> weights;
  for (std::size_t w = 0; w < options.walks_per_node; ++w) {
    for (std::size_t v = 0; v < h.num_nodes(); ++v) {
      const auto start = static_cast<NodeId>(v);
      if (h.degree(start) == 0) continue;
      std::mt19937_64 rng(detail::derive_seed(detail::derive_seed(options.seed, w), v));
      std::vector<NodeId> walk{start};
      walk.reserve(options.walk_length);
      NodeId previous = -1;
      while (walk.size() < options.walk_length) {
        const NodeId next = step(h, walk.back(), previous, options, rng, candidates, weights);
        previous = walk.back();
        walk.push_back(next);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

FeatureMatrix rw_features(const Hypergraph& h, const RandomWalkOptions& options) {
  if (options.dim == 0) throw Error("feature dimension must be positive");
  const std::size_t n = h.num_nodes();
  const std::size_t d = options.dim;
  const auto walks = random_walks(h, options);

  std::vector<double> counts(n, 0.0);
  std::size_t isolated = 0;
  for (const auto& walk : walks) {
    for (NodeId v : walk) counts[v] += 1.0;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (h.degree(static_cast<NodeId>(v)) == 0) ++isolated;
  }
  if (isolated > 0) std::cerr << "warning: " << isolated << " isolated node(s) receive zero rw features\n";

  FeatureMatrix out{ad::Tensor(n, d), FeatureSource::kRandomWalk};
  if (walks.empty()) return out;

  std::vector<double> noise(n);
  for (std::size_t v = 0; v < n; ++v) noise[v] = std::pow(counts[v], 0.75);
  std::discrete_distribution<std::size_t> negative(noise.begin(), noise.end());

  std::mt19937_64 rng(detail::derive_seed(options.seed, 0x5ca1ab1eULL));
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
  ad::Tensor& input = out.values;
  for (std::size_t v = 0; v < n; ++v) {
    if (counts[v] > 0.0) {
      for (double& x : input.row(v)) x = init(rng);
    }
  }
  ad::Tensor output(n, d);
  std::vector<double> update(d);

  std::size_t total_positions = 0;
  for (const auto& walk : walks) total_positions += walk.size();
  total_positions *= std::max<std::size_t>(options.epochs, 1);
  std::size_t seen = 0;

  auto train_pair = [&](std::size_t center, std::size_t target, double label, double lr) {
    auto in = input.row(center);
    auto outv = output.row(target);
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += in[c] * outv[c];
    const double g = lr * (label - sigmoid(dot));
    for (std::size_t c = 0; c < d; ++c) {
      update[c] += g * outv[c];
      outv[c] += g * in[c];
    }
  };

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& walk : walks) {
      for (std::size_t i = 0; i < walk.size(); ++i, ++seen) {
        const double progress = static_cast<double>(seen) / static_cast<double>(total_positions);
        const double lr = options.learning_rate * std::max(1e-4, 1.0 - progress);
        const std::size_t lo = i >= options.window ? i - options.window : 0;
        const std::size_t hi = std::min(walk.size() - 1, i + options.window);
        const auto center = static_cast<std::size_t>(walk[i]);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          std::fill(update.begin(), update.end(), 0.0);
          train_pair(center, static_cast<std::size_t>(walk[j]), 1.0, lr);
          for (std::size_t k = 0; k < options.negative_samples; ++k) {
            const std::size_t sample = negative(rng);
            if (sample == static_cast<std::size_t>(walk[j])) continue;
            train_pair(center, sample, 0.0, lr);
          }
          auto in = input.row(center);
          for (std::size_t c = 0; c < d; ++c) in[c] += update[c];
        }
      }
    }
  }
  if (!input.all_finite()) throw Error("rw features diverged");
  return out;
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos != std::string::npos && line[pos] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw Error(path.string() + ": missing header \"N d\"");
  std::istringstream header(line);
  long long rows = -1;
  long long cols = -1;
  std::string extra;
  if (!(header >> rows >> cols) || (header >> extra) || rows < 0 || cols <= 0) {
    throw Error(where() + ": header must be \"N d\" with N >= 0 and d > 0");
  }
  FeatureMatrix out{ad::Tensor(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)), FeatureSource::kFile};
  for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) {
    if (!next_line()) throw Error(path.string() + ": expected " + std::to_string(rows) + " rows, found " + std::to_string(r));
    std::size_t c = 0;
    std::size_t pos = 0;
    while (true) {
      pos = line.find_first_not_of(" \t\r", pos);
      if (pos == std::string::npos) break;
      std::size_t end = line.find_first_of(" \t\r", pos);
      if (end == std::string::npos) end = line.size();
      if (c == static_cast<std::size_t>(cols)) throw Error(where() + ": more than " + std::to_string(cols) + " values");
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + end, value);
      if (ec != std::errc() || ptr != line.data() + end) {
        throw Error(where() + ": not a number: '" + line.substr(pos, end - pos) + "'");
      }
      if (!std::isfinite(value)) throw Error(where() + ": non-finite value '" + line.substr(pos, end - pos) + "'");
      out.values(r, c++) = value;
      pos = end;
    }
    if (c != static_cast<std::size_t>(cols)) {
      throw Error(where() + ": expected " + std::to_string(cols) + " values, found " + std::to_string(c));
    }
  }
  if (next_line()) throw Error(where() + ": more rows than the header's " + std::to_string(rows));
  return out;
}

void save_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  const ad::Tensor& x = features.values;
  out << "# whatsnet features format_version 1\n";
  out << x.rows() << ' ' << x.cols() << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (c > 0) out << ' ';
      out << x(r, c);
    }
    out << '\n';
  }
}

}  // namespace whatsnet
