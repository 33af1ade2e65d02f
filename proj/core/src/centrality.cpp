#include "whatsnet/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "whatsnet/error.hpp"

namespace whatsnet {

namespace {

// out[e] = Σ_{v∈e} x[v]
void incidence_transpose_times(const Hypergraph& h, const std::vector<double>& x, std::vector<double>& out) {
  out.assign(h.num_edges(), 0.0);
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    double s = 0.0;
    for (NodeId v : h.edge(static_cast<EdgeId>(e))) s += x[v];
    out[e] = s;
  }
}

// out[v] = Σ_{e∈N_v} y[e]
void incidence_times(const Hypergraph& h, const std::vector<double>& y, std::vector<double>& out) {
  out.assign(h.num_nodes(), 0.0);
  for (std::size_t v = 0; v < h.num_nodes(); ++v) {
    double s = 0.0;
    for (EdgeId e : h.incident(static_cast<NodeId>(v))) s += y[e];
    out[v] = s;
  }
}

}  // namespace

std::vector<double> CentralityMatrix::column(std::size_t c) const {
  std::vector<double> out(num_nodes);
  for (std::size_t v = 0; v < num_nodes; ++v) out[v] = values[v * kNumCentralities + c];
  return out;
}

std::vector<double> degree_centrality(const Hypergraph& h) {
  std::vector<double> deg(h.num_nodes());
  for (std::size_t v = 0; v < h.num_nodes(); ++v) deg[v] = static_cast<double>(h.degree(static_cast<NodeId>(v)));
  return deg;
}

std::vector<double> coreness(const Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  std::vector<std::size_t> deg(n);
  std::size_t max_deg = 0;
  for (std::size_t v = 0; v < n; ++v) {
    deg[v] = h.degree(static_cast<NodeId>(v));
    max_deg = std::max(max_deg, deg[v]);
  }

  // Batagelj-Zaversnik arrays: nodes sorted by current degree, bin[d] is the
  // first slot holding degree d.
  std::vector<std::size_t> bin(max_deg + 2, 0);
  for (std::size_t v = 0; v < n; ++v) ++bin[deg[v] + 1];
  for (std::size_t d = 1; d < bin.size(); ++d) bin[d] += bin[d - 1];
  std::vector<std::size_t> pos(n);
  std::vector<NodeId> order(n);
  {
    std::vector<std::size_t> next(bin.begin(), bin.end() - 1);
    for (std::size_t v = 0; v < n; ++v) {
      pos[v] = next[deg[v]]++;
      order[pos[v]] = static_cast<NodeId>(v);
    }
  }

  std::vector<char> edge_alive(h.num_edges(), 1);
  std::vector<char> removed(n, 0);
  std::vector<double> core(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = order[i];
    const std::size_t level = deg[v];
    core[v] = static_cast<double>(level);
    removed[v] = 1;
    for (EdgeId e : h.incident(v)) {
      if (!edge_alive[e]) continue;
      edge_alive[e] = 0;
      for (NodeId u : h.edge(e)) {
        if (removed[u] || deg[u] <= level) continue;
        // Move u to the front of its bin, then shrink the bin by one.
        const std::size_t du = deg[u];
        const std::size_t pu = pos[u];
        const std::size_t pw = bin[du];
        const NodeId w = order[pw];
        if (u != w) {
          order[pu] = w;
          pos[w] = pu;
          order[pw] = u;
          pos[u] = pw;
        }
        ++bin[du];
        --deg[u];
      }
    }
  }
  return core;
}

std::vector<double> eigenvector_centrality(const Hypergraph& h, const PowerIterationOptions& options) {
  const std::size_t n = h.num_nodes();
  if (h.num_edges() == 0 || n == 0) throw Error("eigenvector centrality: hypergraph has no hyperedges");
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> edge_sum;
  std::vector<double> next;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    incidence_transpose_times(h, x, edge_sum);
    incidence_times(h, edge_sum, next);
    double norm = 0.0;
    for (double a : next) norm += a * a;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw Error("eigenvector centrality: zero operator");
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] /= norm;
      diff = std::max(diff, std::abs(next[v] - x[v]));
    }
    x.swap(next);
    if (diff < options.tol) break;
  }
  return x;
}

std::vector<double> pagerank(const Hypergraph& h, double beta, const PowerIterationOptions& options) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error("pagerank: damping must lie in (0, 1)");
  const std::size_t n = h.num_nodes();
  if (n == 0) return {};
  const double inv_n = 1.0 / static_cast<double>(n);

  // Row sums of I Iᵀ: D_v = Σ_{e∈N_v} |e|.
  std::vector<double> row_sum(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (EdgeId e : h.incident(static_cast<NodeId>(v))) row_sum[v] += static_cast<double>(h.edge_size(e));
  }

  std::vector<double> r(n, inv_n);
  std::vector<double> scaled(n);
  std::vector<double> edge_sum;
  std::vector<double> next;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (row_sum[v] > 0.0) {
        scaled[v] = r[v] / row_sum[v];
      } else {
        scaled[v] = 0.0;
        dangling += r[v];
      }
    }
    incidence_transpose_times(h, scaled, edge_sum);
    incidence_times(h, edge_sum, next);
    const double base = (1.0 - beta) * inv_n + beta * dangling * inv_n;
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] = beta * next[v] + base;
      diff += std::abs(next[v] - r[v]);
    }
    r.swap(next);
    if (diff < options.tol) break;
  }
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  for (double& a : r) a /= total;
  return r;
}

CentralityMatrix compute_all(const Hypergraph& h) {
  CentralityMatrix f;
  f.num_nodes = h.num_nodes();
  f.values.assign(h.num_nodes() * kNumCentralities, 0.0);
  const std::array<std::vector<double>, kNumCentralities> columns = {
      degree_centrality(h), eigenvector_centrality(h), pagerank(h), coreness(h)};
  for (std::size_t c = 0; c < kNumCentralities; ++c) {
    for (std::size_t v = 0; v < h.num_nodes(); ++v) f.values[v * kNumCentralities + c] = columns[c][v];
  }
  return f;
}

void save_centralities(const CentralityMatrix& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# whatsnet centrality format_version 1\n" << "node";
  for (auto name : kCentralityNames) out << '\t' << name;
  out << '\n' << std::setprecision(17);
  for (std::size_t v = 0; v < c.num_nodes; ++v) {
    out << v;
    for (std::size_t k = 0; k < kNumCentralities; ++k) out << '\t' << c.at(static_cast<NodeId>(v), k);
    out << '\n';
  }
}

}  // namespace whatsnet
