#include "whatsnet/hypergraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "whatsnet/error.hpp"

namespace whatsnet {

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

template <typename Int>
Int parse_int(std::string_view token, const std::string& where) {
  Int value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(where + ": not an integer: '" + std::string(token) + "'");
  }
  return value;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

bool is_blank(std::string_view line) { return tokenize(line).empty(); }

bool is_comment(std::string_view line) {
  const auto pos = line.find_first_not_of(" \t");
  return pos != std::string_view::npos && line[pos] == '#';
}

// getline that skips '#' comment lines while counting them.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_comment(line)) return true;
  }
  return false;
}

}  // namespace

Hypergraph::Hypergraph(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& edges)
    : num_nodes_(num_nodes) {
  edge_offsets_.reserve(edges.size() + 1);
  std::vector<std::size_t> degree(num_nodes, 0);
  std::vector<EdgeId> last_seen(num_nodes, -1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].empty()) throw Error("hyperedge " + std::to_string(e) + " is empty");
    for (NodeId v : edges[e]) {
      if (v < 0 || static_cast<std::size_t>(v) >= num_nodes) {
        throw Error("hyperedge " + std::to_string(e) + ": node id " + std::to_string(v) + " outside [0, " +
                    std::to_string(num_nodes) + ")");
      }
      if (last_seen[v] == static_cast<EdgeId>(e)) {
        throw Error("hyperedge " + std::to_string(e) + ": duplicate node " + std::to_string(v));
      }
      last_seen[v] = static_cast<EdgeId>(e);
      ++degree[v];
      members_.push_back(v);
      pair_edges_.push_back(static_cast<EdgeId>(e));
    }
    edge_offsets_.push_back(members_.size());
  }

  node_offsets_.resize(num_nodes + 1);
  node_offsets_[0] = 0;
  for (std::size_t v = 0; v < num_nodes; ++v) node_offsets_[v + 1] = node_offsets_[v] + degree[v];
  incident_edges_.resize(members_.size());
  incident_pairs_.resize(members_.size());
  std::vector<std::size_t> cursor(node_offsets_.begin(), node_offsets_.end() - 1);
  // Pairs are visited in increasing edge id, so every N_v comes out sorted.
  for (std::size_t p = 0; p < members_.size(); ++p) {
    const std::size_t slot = cursor[members_[p]]++;
    incident_edges_[slot] = pair_edges_[p];
    incident_pairs_[slot] = static_cast<PairId>(p);
  }
}

std::vector<std::vector<NodeId>> Hypergraph::edge_lists() const {
  std::vector<std::vector<NodeId>> out(num_edges());
  for (std::size_t e = 0; e < num_edges(); ++e) {
    auto members = edge(static_cast<EdgeId>(e));
    out[e].assign(members.begin(), members.end());
  }
  return out;
}

EdgeDependentLabels::EdgeDependentLabels(const Hypergraph& h, int num_classes,
                                         const std::vector<std::vector<int>>& per_edge)
    : num_classes_(num_classes), pair_labels_(h.total_size(), kUnlabeled), labeled_(h.num_edges(), 0) {
  if (num_classes < 1) throw Error("num_classes must be positive");
  if (per_edge.size() != h.num_edges()) {
    throw Error("label rows (" + std::to_string(per_edge.size()) + ") != hyperedges (" +
                std::to_string(h.num_edges()) + ")");
  }
  for (std::size_t e = 0; e < per_edge.size(); ++e) {
    if (per_edge[e].empty()) continue;
    const auto id = static_cast<EdgeId>(e);
    if (per_edge[e].size() != h.edge_size(id)) {
      throw Error("hyperedge " + std::to_string(e) + ": " + std::to_string(per_edge[e].size()) +
                  " labels for " + std::to_string(h.edge_size(id)) + " members");
    }
    for (std::size_t i = 0; i < per_edge[e].size(); ++i) {
      const int y = per_edge[e][i];
      if (y < 0 || y >= num_classes) {
        throw Error("hyperedge " + std::to_string(e) + ": label " + std::to_string(y) + " outside [0, " +
                    std::to_string(num_classes) + ")");
      }
      pair_labels_[h.pair_offset(id) + i] = y;
    }
    labeled_[e] = 1;
  }
}

std::vector<EdgeId> EdgeDependentLabels::labeled_edges() const {
  std::vector<EdgeId> out;
  for (std::size_t e = 0; e < labeled_.size(); ++e) {
    if (labeled_[e]) out.push_back(static_cast<EdgeId>(e));
  }
  return out;
}

Hypergraph load_hypergraph(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const std::string where = path.string();
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw Error(where + ": missing header line \"N M\"");
  auto header = tokenize(line);
  if (header.size() != 2) throw Error(where + ": header must be \"N M\"");
  const std::string header_at = where + ":" + std::to_string(line_no);
  const auto n = parse_int<std::int64_t>(header[0], header_at);
  const auto m = parse_int<std::int64_t>(header[1], header_at);
  if (n < 0 || m < 0) throw Error(where + ": negative header value");

  std::vector<std::vector<NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  while (edges.size() < static_cast<std::size_t>(m)) {
    if (!next_line(in, line, line_no)) {
      throw Error(where + ": expected " + std::to_string(m) + " hyperedges, found " + std::to_string(edges.size()));
    }
    const std::string at = where + ":" + std::to_string(line_no);
    auto tokens = tokenize(line);
    if (tokens.empty()) throw Error(at + ": empty hyperedge");
    std::vector<NodeId> members;
    members.reserve(tokens.size());
    for (auto t : tokens) {
      const auto v = parse_int<std::int64_t>(t, at);
      if (v < 0 || v >= n) throw Error(at + ": node id " + std::to_string(v) + " >= N=" + std::to_string(n));
      members.push_back(static_cast<NodeId>(v));
    }
    std::vector<NodeId> sorted = members;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(at + ": duplicate node in hyperedge");
    }
    edges.push_back(std::move(members));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank(line) && !is_comment(line)) {
      throw Error(where + ":" + std::to_string(line_no) + ": more hyperedges than declared");
    }
  }
  return Hypergraph(static_cast<std::size_t>(n), edges);
}

void save_hypergraph(const Hypergraph& h, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "# whatsnet hypergraph format_version 1\n";
  out << h.num_nodes() << ' ' << h.num_edges() << '\n';
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const char* sep = "";
    for (NodeId v : h.edge(static_cast<EdgeId>(e))) {
      out << sep << v;
      sep = " ";
    }
    out << '\n';
  }
}

EdgeDependentLabels load_labels(const std::filesystem::path& path, const Hypergraph& h, int num_classes) {
  auto in = open_for_read(path);
  const std::string where = path.string();
  std::vector<std::vector<int>> per_edge;
  per_edge.reserve(h.num_edges());
  std::string line;
  std::size_t line_no = 0;
  while (per_edge.size() < h.num_edges()) {
    if (!next_line(in, line, line_no)) {
      throw Error(where + ": expected " + std::to_string(h.num_edges()) + " label lines, found " +
                  std::to_string(per_edge.size()));
    }
    const std::string at = where + ":" + std::to_string(line_no);
    auto tokens = tokenize(line);
    const auto e = static_cast<EdgeId>(per_edge.size());
    if (tokens.size() == 1 && tokens[0] == "?") {
      per_edge.emplace_back();
      continue;
    }
    if (tokens.size() != h.edge_size(e)) {
      throw Error(at + ": " + std::to_string(tokens.size()) + " labels for a hyperedge of size " +
                  std::to_string(h.edge_size(e)));
    }
    std::vector<int> row;
    row.reserve(tokens.size());
    for (auto t : tokens) {
      const int y = parse_int<int>(t, at);
      if (y < 0 || y >= num_classes) {
        throw Error(at + ": label " + std::to_string(y) + " not in [0, " + std::to_string(num_classes) + ")");
      }
      row.push_back(y);
    }
    per_edge.push_back(std::move(row));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank(line) && !is_comment(line)) {
      throw Error(where + ":" + std::to_string(line_no) + ": more label lines than hyperedges");
    }
  }
  return EdgeDependentLabels(h, num_classes, per_edge);
}

void save_labels(const Hypergraph& h, const EdgeDependentLabels& labels, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "# whatsnet labels format_version 1\n";
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    if (!labels.is_labeled(id)) {
      out << "?\n";
      continue;
    }
    for (std::size_t i = 0; i < h.edge_size(id); ++i) {
      if (i) out << ' ';
      out << labels.label(h.pair_offset(id) + static_cast<PairId>(i));
    }
    out << '\n';
  }
}

std::unordered_map<std::string, NodeId> load_vocabulary(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::unordered_map<std::string, NodeId> vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string at = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(at + ": expected token<TAB>id");
    const auto id = parse_int<NodeId>(std::string_view(line).substr(tab + 1), at);
    if (id < 0) throw Error(at + ": negative id");
    if (!vocab.emplace(line.substr(0, tab), id).second) throw Error(at + ": duplicate token");
  }
  return vocab;
}

Split split_edges(std::vector<EdgeId> labeled_edges, std::array<double, 3> ratios, std::uint64_t seed) {
  for (double r : ratios) {
    if (r < 0.0) throw Error("split ratios must be nonnegative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw Error("split ratios must sum to 1");
  std::mt19937_64 rng(seed);
  std::shuffle(labeled_edges.begin(), labeled_edges.end(), rng);
  const double m = static_cast<double>(labeled_edges.size());
  const auto n_val = static_cast<std::size_t>(std::floor(ratios[1] * m + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios[2] * m + 1e-9));
  const std::size_t n_train = labeled_edges.size() - n_val - n_test;

  Split split;
  auto it = labeled_edges.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  split.val.assign(it, it + static_cast<std::ptrdiff_t>(n_val));
  it += static_cast<std::ptrdiff_t>(n_val);
  split.test.assign(it, labeled_edges.end());
  return split;
}

int quantile_label(std::size_t order, std::size_t edge_size, int num_classes) {
  // ceil(order * C / |e|) - 1 in exact integer arithmetic.
  const std::size_t c = static_cast<std::size_t>(num_classes);
  return static_cast<int>((order * c + edge_size - 1) / edge_size) - 1;
}

std::pair<Hypergraph, EdgeDependentLabels> generate_synthetic(const SyntheticOptions& opt) {
  if (opt.num_nodes < 1 || opt.num_edges < 1) throw Error("synthetic: need at least one node and one hyperedge");
  if (opt.min_edge_size < 2) throw Error("synthetic: minimum hyperedge size must be >= 2");
  if (opt.min_edge_size > opt.max_edge_size) throw Error("synthetic: minimum hyperedge size exceeds maximum");
  if (opt.max_edge_size > opt.num_nodes) throw Error("synthetic: maximum hyperedge size exceeds node count");
  if (opt.num_classes < 2) throw Error("synthetic: need at least two classes");

  std::mt19937_64 rng(opt.seed);
  // Zipf-like popularity over a random permutation of node ids.
  std::vector<NodeId> rank(opt.num_nodes);
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> cumulative(opt.num_nodes);
  double total = 0.0;
  for (std::size_t v = 0; v < opt.num_nodes; ++v) {
    total += 1.0 / std::pow(static_cast<double>(rank[v]) + 1.0, 0.8);
    cumulative[v] = total;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size_dist(opt.min_edge_size, opt.max_edge_size);

  std::vector<std::vector<NodeId>> edges(opt.num_edges);
  std::vector<char> taken(opt.num_nodes, 0);
  for (auto& members : edges) {
    const std::size_t size = size_dist(rng);
    while (members.size() < size) {
      const double u = unit(rng) * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      if (it == cumulative.end()) --it;
      const auto v = static_cast<NodeId>(it - cumulative.begin());
      if (taken[v]) continue;
      taken[v] = 1;
      members.push_back(v);
    }
    for (NodeId v : members) taken[v] = 0;
  }

  Hypergraph h(opt.num_nodes, edges);
  std::vector<std::vector<int>> per_edge(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& members = edges[e];
    per_edge[e].reserve(members.size());
    for (NodeId v : members) {
      std::size_t order = 0;
      for (NodeId u : members) order += h.degree(u) <= h.degree(v) ? 1 : 0;
      per_edge[e].push_back(quantile_label(order, members.size(), opt.num_classes));
    }
  }
  EdgeDependentLabels labels(h, opt.num_classes, per_edge);
  return {std::move(h), std::move(labels)};
}

}  // namespace whatsnet
