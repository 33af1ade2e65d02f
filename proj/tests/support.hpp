#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "whatsnet/autodiff.hpp"
#include "whatsnet/hypergraph.hpp"

namespace whatsnet::testing {

inline ad::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  ad::Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = normal(rng);
  return t;
}

inline double max_abs_diff(const ad::Tensor& a, const ad::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

using LossFn = std::function<ad::Var(ad::Tape&, ad::ParamStore&)>;

/// Relative error ||analytic - numeric|| / max(||analytic||, ||numeric||) per
/// parameter, with central differences of step `h`.
inline std::map<std::string, double> gradient_errors(ad::ParamStore& store, const LossFn& loss_fn, double h = 1e-6) {
  store.zero_grad();
  {
    ad::Tape tape;
    tape.backward(loss_fn(tape, store));
  }
  std::map<std::string, double> errors;
  for (auto& [name, p] : store.params()) {
    double diff2 = 0.0;
    double an2 = 0.0;
    double num2 = 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      ad::Tape plus_tape;
      const double plus = loss_fn(plus_tape, store).value()[0];
      p.value[i] = saved - h;
      ad::Tape minus_tape;
      const double minus = loss_fn(minus_tape, store).value()[0];
      p.value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = p.grad[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      an2 += analytic * analytic;
      num2 += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(an2), std::sqrt(num2), 1e-12});
    errors[name] = std::sqrt(diff2) / denom;
  }
  return errors;
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("whatsnet-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Random hypergraph with edge sizes in [1, max_size]; nodes may be isolated.
inline Hypergraph random_hypergraph(std::size_t n, std::size_t m, std::size_t max_size, std::mt19937_64& rng) {
  std::vector<std::vector<NodeId>> edges(m);
  std::uniform_int_distribution<std::size_t> size_dist(1, std::min(max_size, n));
  std::vector<NodeId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(i);
  for (auto& e : edges) {
    std::shuffle(ids.begin(), ids.end(), rng);
    e.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(size_dist(rng)));
  }
  return Hypergraph(n, edges);
}

/// Small hypergraph used by several tests: 6 nodes, 4 hyperedges of mixed
/// sizes including a singleton.
inline Hypergraph tiny_hypergraph() { return Hypergraph(6, {{0, 1, 2}, {2, 3, 4, 5}, {1, 4}, {5}}); }

}  // namespace whatsnet::testing
