#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace whatsnet::ad {

/// Dense row-major matrix of doubles. Vectors are 1 x n, scalars 1 x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor(1, 1, value); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;
  void fill(double value);
  Tensor& operator+=(const Tensor& other);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Learnable tensors by unique name, with their gradients and Adam moments.
class ParamStore {
 public:
  struct Param {
    Tensor value;
    Tensor grad;
    Tensor first_moment;
    Tensor second_moment;
  };

  /// Registers a new parameter. Throws on a duplicate name.
  Tensor& add(const std::string& name, Tensor init);
  bool contains(const std::string& name) const { return params_.contains(name); }
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  std::map<std::string, Param>& params() { return params_; }
  const std::map<std::string, Param>& params() const { return params_; }

  void zero_grad();
  std::size_t num_scalars() const;
  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t step) { step_count_ = step; }

 private:
  std::map<std::string, Param> params_;
  std::int64_t step_count_ = 0;
};

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records primitive applications in topological order; backward() walks
/// them in exact reverse and accumulates gradients additively at fan-out.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_value, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to a ParamStore entry; the same name always yields the same
  /// Var on one tape. backward() adds the leaf gradient into the store.
  Var param(ParamStore& store, const std::string& name);

  /// Appends a node. `backward` is kept only if some input requires grad.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  /// Adds `g` into the gradient of `v` (no-op when v needs no gradient).
  void accumulate(Var v, const Tensor& g);
  /// Mutable gradient buffer of `v`, allocated as zeros on first use.
  Tensor& grad(Var v);

  /// Reverse pass from a 1 x 1 loss. Throws when the loss does not depend on
  /// any parameter.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    ParamStore::Param* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> param_ids_;
};

/// Row ranges [offsets[s], offsets[s+1]) delimiting the sets of a stacked
/// matrix.
struct Segments {
  std::vector<std::size_t> offsets{0};

  std::size_t count() const { return offsets.size() - 1; }
  std::size_t total() const { return offsets.back(); }
  std::size_t begin(std::size_t s) const { return offsets[s]; }
  std::size_t size(std::size_t s) const { return offsets[s + 1] - offsets[s]; }
  void push(std::size_t n) { offsets.push_back(offsets.back() + n); }

  static Segments uniform(std::size_t count, std::size_t size);
};

inline constexpr double kNormEps = 1e-5;

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var broadcast_row_add(Var a, Var row);
Var scale(Var a, double s);
// Subgradient 0 at 0.
Var relu(Var a);
Var row_softmax(Var a);
Var layer_norm(Var x, Var gain, Var bias, double eps = kNormEps);
Var concat_cols(Var a, Var b);
Var concat_rows(Var a, Var b);
Var mean_rows(Var a);
Var sum(Var a);
/// Inverted dropout: survivors scaled by 1/(1-p); identity when !training.
Var dropout(Var x, double p, bool training, std::mt19937_64& rng);
/// Mean over rows of -log softmax(logits)[target].
Var cross_entropy_from_logits(Var logits, std::span<const int> targets);
/// out.row(i) = x.row(index[i]); backward scatter-adds.
Var gather_rows(Var x, std::span<const std::size_t> index);

/// Scaled dot-product attention applied independently per segment and per
/// head: query rows of segment s attend to key/value rows of segment s.
/// Heads split the columns into `heads` equal blocks; scores are scaled by
/// 1/sqrt(cols/heads). When `weights` is non-null it receives, per segment
/// and head, the row-stochastic attention matrices concatenated in order.
Var segment_attention(Var q, Var k, Var v, const Segments& q_segments, const Segments& k_segments, std::size_t heads,
                      std::vector<double>* weights = nullptr);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Uniform entries in ±sqrt(6 / (rows + cols)).
Tensor xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

/// One bias-corrected Adam update of every parameter from its gradient.
void adam_step(ParamStore& store, const AdamOptions& options);

}  // namespace whatsnet::ad
