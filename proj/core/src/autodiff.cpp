#include "whatsnet/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "whatsnet/error.hpp"

namespace whatsnet::ad {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
MutMap as_matrix(Tensor& t) {
  return MutMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

std::string shape_of(const Tensor& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
}

Tape& tape_of(Var a) {
  if (a.tape() == nullptr) throw Error("operation on an unbound Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) throw Error("operands recorded on different tapes");
  return tape_of(a);
}

void softmax_inplace(std::span<double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& x : row) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : row) x /= total;
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw Error("tensor data length does not match shape");
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) shape_error("+=", *this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& ParamStore::add(const std::string& name, Tensor init) {
  if (params_.contains(name)) throw Error("duplicate parameter name: " + name);
  Param p;
  p.grad = Tensor(init.rows(), init.cols());
  p.first_moment = Tensor(init.rows(), init.cols());
  p.second_moment = Tensor(init.rows(), init.cols());
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second.value;
}

ParamStore::Param& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

const ParamStore::Param& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

Segments Segments::uniform(std::size_t count, std::size_t size) {
  Segments s;
  for (std::size_t i = 0; i < count; ++i) s.push(size);
  return s;
}

const Tensor& Var::value() const { return tape_->value(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw Error("non-finite constant");
  nodes_.push_back(Node{std::move(value), {}, false, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(ParamStore& store, const std::string& name) {
  if (auto it = param_ids_.find(name); it != param_ids_.end()) return Var(this, it->second);
  auto& p = store.get(name);
  nodes_.push_back(Node{p.value, {}, true, {}, &p});
  param_ids_.emplace(name, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op) {
  if (!value.all_finite()) throw Error(std::string("non-finite value produced by ") + op);
  const bool needs = std::any_of(inputs.begin(), inputs.end(), [this](Var v) { return requires_grad(v); });
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(backward) : BackwardFn{}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_[v.id()];
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
    n.grad = Tensor(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
  if (!requires_grad(v)) return;
  grad(v) += g;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw Error("loss belongs to another tape");
  const Node& root = nodes_[loss.id()];
  if (root.value.rows() != 1 || root.value.cols() != 1) throw Error("backward: loss must be a scalar");
  if (!root.requires_grad) throw Error("backward: loss is not connected to any parameter");
  for (auto& n : nodes_) n.grad = Tensor();
  grad(loss).fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    // Closures only write gradients of earlier nodes.
    if (n.backward) n.backward(*this, n.value, n.grad);
    if (n.param != nullptr) n.param->grad += n.grad;
  }
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  Tensor out(av.rows(), bv.cols());
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  const Var in[] = {a, b};
  return t.record(std::move(out), in, [a, b](Tape& tp, const Tensor&, const Tensor& g) {
    if (tp.requires_grad(a)) as_matrix(tp.grad(a)).noalias() += as_matrix(g) * as_matrix(tp.value(b)).transpose();
    if (tp.requires_grad(b)) as_matrix(tp.grad(b)).noalias() += as_matrix(tp.value(a)).transpose() * as_matrix(g);
  }, "matmul");
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("add", av, bv);
  Tensor out = av;
  out += bv;
  const Var in[] = {a, b};
  return t.record(std::move(out), in, [a, b](Tape& tp, const Tensor&, const Tensor& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  }, "add");
}

Var broadcast_row_add(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) shape_error("broadcast_row_add", av, rv);
  Tensor out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv[c];
  }
  const Var in[] = {a, row};
  return t.record(std::move(out), in, [a, row](Tape& tp, const Tensor&, const Tensor& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) {
      Tensor& gr = tp.grad(row);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gr[c] += g(r, c);
      }
    }
  }, "broadcast_row_add");
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  const Var in[] = {a};
  return t.record(std::move(out), in, [a, s](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  }, "scale");
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  const Var in[] = {a};
  return t.record(std::move(out), in, [a](Tape& tp, const Tensor&, const Tensor& g) {
    const Tensor& x = tp.value(a);
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) ga[i] += g[i];
    }
  }, "relu");
}

Var row_softmax(Var a) {
  Tape& t = tape_of(a);
  Tensor out = a.value();
  if (out.cols() == 0) throw Error("row_softmax: empty rows");
  for (std::size_t r = 0; r < out.rows(); ++r) softmax_inplace(out.row(r));
  const Var in[] = {a};
  return t.record(std::move(out), in, [a](Tape& tp, const Tensor& y, const Tensor& g) {
    Tensor& ga = tp.grad(a);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += y(r, c) * (g(r, c) - dot);
    }
  }, "row_softmax");
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  Tape& t = tape_of(x, gain);
  tape_of(x, bias);
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows();
  const std::size_t d = xv.cols();
  if (gain.rows() != 1 || gain.cols() != d) shape_error("layer_norm gain", xv, gain.value());
  if (bias.rows() != 1 || bias.cols() != d) shape_error("layer_norm bias", xv, bias.value());
  if (d == 0) throw Error("layer_norm: zero-width rows");

  Tensor normalized(n, d);
  std::vector<double> inv_std(n);
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  Tensor out(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += xv(r, c);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (xv(r, c) - mean) * (xv(r, c) - mean);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      normalized(r, c) = (xv(r, c) - mean) * inv_std[r];
      out(r, c) = normalized(r, c) * gv[c] + bv[c];
    }
  }
  const Var in[] = {x, gain, bias};
  return t.record(std::move(out), in,
                  [x, gain, bias, normalized = std::move(normalized), inv_std = std::move(inv_std)](
                      Tape& tp, const Tensor&, const Tensor& g) {
                    const std::size_t rows = g.rows();
                    const std::size_t cols = g.cols();
                    if (tp.requires_grad(gain) || tp.requires_grad(bias)) {
                      Tensor dg(1, cols);
                      Tensor db(1, cols);
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t c = 0; c < cols; ++c) {
                          dg[c] += g(r, c) * normalized(r, c);
                          db[c] += g(r, c);
                        }
                      }
                      tp.accumulate(gain, dg);
                      tp.accumulate(bias, db);
                    }
                    if (!tp.requires_grad(x)) return;
                    const Tensor& gv = tp.value(gain);
                    Tensor& gx = tp.grad(x);
                    std::vector<double> dxhat(cols);
                    for (std::size_t r = 0; r < rows; ++r) {
                      double mean_d = 0.0;
                      double mean_dx = 0.0;
                      for (std::size_t c = 0; c < cols; ++c) {
                        dxhat[c] = g(r, c) * gv[c];
                        mean_d += dxhat[c];
                        mean_dx += dxhat[c] * normalized(r, c);
                      }
                      mean_d /= static_cast<double>(cols);
                      mean_dx /= static_cast<double>(cols);
                      for (std::size_t c = 0; c < cols; ++c) {
                        gx(r, c) += inv_std[r] * (dxhat[c] - mean_d - normalized(r, c) * mean_dx);
                      }
                    }
                  },
                  "layer_norm");
}

Var concat_cols(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) shape_error("concat_cols", av, bv);
  const std::size_t ca = av.cols();
  const std::size_t cb = bv.cols();
  Tensor out(av.rows(), ca + cb);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::copy(av.row(r).begin(), av.row(r).end(), out.row(r).begin());
    std::copy(bv.row(r).begin(), bv.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(ca));
  }
  const Var in[] = {a, b};
  return t.record(std::move(out), in, [a, b, ca, cb](Tape& tp, const Tensor&, const Tensor& g) {
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad(a);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
      }
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad(b);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
      }
    }
  }, "concat_cols");
}

Var concat_rows(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols()) shape_error("concat_rows", av, bv);
  std::vector<double> data;
  data.reserve(av.size() + bv.size());
  data.insert(data.end(), av.values().begin(), av.values().end());
  data.insert(data.end(), bv.values().begin(), bv.values().end());
  const std::size_t split = av.size();
  Tensor out(av.rows() + bv.rows(), av.cols(), std::move(data));
  const Var in[] = {a, b};
  return t.record(std::move(out), in, [a, b, split](Tape& tp, const Tensor&, const Tensor& g) {
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad(a);
      for (std::size_t i = 0; i < split; ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[split + i];
    }
  }, "concat_rows");
}

Var mean_rows(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (av.rows() == 0) throw Error("mean_rows: no rows");
  Tensor out(1, av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out[c] += av(r, c);
  }
  const double inv = 1.0 / static_cast<double>(av.rows());
  for (std::size_t c = 0; c < av.cols(); ++c) out[c] *= inv;
  const Var in[] = {a};
  return t.record(std::move(out), in, [a, inv](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor& ga = tp.grad(a);
    for (std::size_t r = 0; r < ga.rows(); ++r) {
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[c] * inv;
    }
  }, "mean_rows");
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double total = 0.0;
  for (double x : a.value().values()) total += x;
  const Var in[] = {a};
  return t.record(Tensor::scalar(total), in, [a](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
  }, "sum");
}

Var dropout(Var x, double p, bool training, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw Error("dropout: rate must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  Tape& t = tape_of(x);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  Tensor mask(x.rows(), x.cols());
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask[i] = unit(rng) >= p ? keep_scale : 0.0;
    out[i] *= mask[i];
  }
  const Var in[] = {x};
  return t.record(std::move(out), in, [x, mask = std::move(mask)](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  }, "dropout");
}

Var cross_entropy_from_logits(Var logits, std::span<const int> targets) {
  Tape& t = tape_of(logits);
  const Tensor& z = logits.value();
  if (z.rows() != targets.size()) throw Error("cross_entropy: one target per logits row required");
  if (z.rows() == 0) throw Error("cross_entropy: empty batch");
  Tensor probs = z;
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const int y = targets[r];
    if (y < 0 || static_cast<std::size_t>(y) >= z.cols()) throw Error("cross_entropy: target out of range");
    auto row = probs.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double v : row) total += std::exp(v - mx);
    loss += mx + std::log(total) - z(r, static_cast<std::size_t>(y));
    softmax_inplace(row);
  }
  const double inv = 1.0 / static_cast<double>(z.rows());
  std::vector<int> labels(targets.begin(), targets.end());
  const Var in[] = {logits};
  return t.record(Tensor::scalar(loss * inv), in,
                  [logits, inv, probs = std::move(probs), labels = std::move(labels)](Tape& tp, const Tensor&,
                                                                                     const Tensor& g) {
                    Tensor& gz = tp.grad(logits);
                    const double s = g[0] * inv;
                    for (std::size_t r = 0; r < probs.rows(); ++r) {
                      for (std::size_t c = 0; c < probs.cols(); ++c) {
                        const double onehot = static_cast<int>(c) == labels[r] ? 1.0 : 0.0;
                        gz(r, c) += s * (probs(r, c) - onehot);
                      }
                    }
                  },
                  "cross_entropy_from_logits");
}

Var gather_rows(Var x, std::span<const std::size_t> index) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t d = xv.cols();
  Tensor out(index.size(), d);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= xv.rows()) throw Error("gather_rows: index out of range");
    std::copy(xv.row(index[i]).begin(), xv.row(index[i]).end(), out.row(i).begin());
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const Var in[] = {x};
  return t.record(std::move(out), in, [x, idx = std::move(idx)](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor& gx = tp.grad(x);
    const std::size_t cols = g.cols();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double* dst = gx.data() + idx[i] * cols;
      const double* src = g.data() + i * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
  }, "gather_rows");
}

Var segment_attention(Var q, Var k, Var v, const Segments& q_segments, const Segments& k_segments,
                      std::size_t heads, std::vector<double>* weights) {
  Tape& t = tape_of(q, k);
  tape_of(q, v);
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  if (qv.cols() != kv.cols()) shape_error("segment_attention q/k", qv, kv);
  if (kv.rows() != vv.rows()) shape_error("segment_attention k/v", kv, vv);
  if (heads == 0 || qv.cols() % heads != 0 || vv.cols() % heads != 0) {
    throw Error("segment_attention: width not divisible by head count");
  }
  if (q_segments.count() != k_segments.count()) throw Error("segment_attention: segment counts differ");
  if (q_segments.total() != qv.rows() || k_segments.total() != kv.rows()) {
    throw Error("segment_attention: segments do not cover the inputs");
  }
  const std::size_t dk = qv.cols() / heads;
  const std::size_t dv = vv.cols() / heads;
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(dk));

  // Attention weights laid out segment-major, then head, then query row.
  std::vector<std::size_t> weight_offsets(q_segments.count() + 1, 0);
  for (std::size_t s = 0; s < q_segments.count(); ++s) {
    if (q_segments.size(s) > 0 && k_segments.size(s) == 0) throw Error("segment_attention: queries with no keys");
    weight_offsets[s + 1] = weight_offsets[s] + heads * q_segments.size(s) * k_segments.size(s);
  }
  std::vector<double> probs(weight_offsets.back());
  Tensor out(qv.rows(), vv.cols());
  for (std::size_t s = 0; s < q_segments.count(); ++s) {
    const std::size_t qb = q_segments.begin(s);
    const std::size_t nq = q_segments.size(s);
    const std::size_t kb = k_segments.begin(s);
    const std::size_t nk = k_segments.size(s);
    for (std::size_t h = 0; h < heads; ++h) {
      double* p = probs.data() + weight_offsets[s] + h * nq * nk;
      for (std::size_t i = 0; i < nq; ++i) {
        const double* qi = qv.data() + (qb + i) * qv.cols() + h * dk;
        double* pi = p + i * nk;
        for (std::size_t j = 0; j < nk; ++j) {
          const double* kj = kv.data() + (kb + j) * kv.cols() + h * dk;
          double dot = 0.0;
          for (std::size_t c = 0; c < dk; ++c) dot += qi[c] * kj[c];
          pi[j] = dot * scale_factor;
        }
        softmax_inplace({pi, nk});
        double* oi = out.data() + (qb + i) * out.cols() + h * dv;
        for (std::size_t j = 0; j < nk; ++j) {
          const double* vj = vv.data() + (kb + j) * vv.cols() + h * dv;
          for (std::size_t c = 0; c < dv; ++c) oi[c] += pi[j] * vj[c];
        }
      }
    }
  }
  if (weights != nullptr) *weights = probs;

  const Var in[] = {q, k, v};
  return t.record(
      std::move(out), in,
      [q, k, v, q_segments, k_segments, heads, dk, dv, scale_factor, probs = std::move(probs),
       weight_offsets = std::move(weight_offsets)](Tape& tp, const Tensor&, const Tensor& g) {
        const Tensor& qv = tp.value(q);
        const Tensor& kv = tp.value(k);
        const Tensor& vv = tp.value(v);
        const bool need_q = tp.requires_grad(q);
        const bool need_k = tp.requires_grad(k);
        const bool need_v = tp.requires_grad(v);
        // Separate buffers: q, k and v may alias the same node.
        Tensor gq(qv.rows(), qv.cols());
        Tensor gk(kv.rows(), kv.cols());
        Tensor gvv(vv.rows(), vv.cols());
        std::vector<double> dscore;
        for (std::size_t s = 0; s < q_segments.count(); ++s) {
          const std::size_t qb = q_segments.begin(s);
          const std::size_t nq = q_segments.size(s);
          const std::size_t kb = k_segments.begin(s);
          const std::size_t nk = k_segments.size(s);
          dscore.resize(nk);
          for (std::size_t h = 0; h < heads; ++h) {
            const double* p = probs.data() + weight_offsets[s] + h * nq * nk;
            for (std::size_t i = 0; i < nq; ++i) {
              const double* pi = p + i * nk;
              const double* gi = g.data() + (qb + i) * g.cols() + h * dv;
              double weighted = 0.0;
              for (std::size_t j = 0; j < nk; ++j) {
                const double* vj = vv.data() + (kb + j) * vv.cols() + h * dv;
                double dp = 0.0;
                for (std::size_t c = 0; c < dv; ++c) dp += gi[c] * vj[c];
                dscore[j] = dp;
                weighted += dp * pi[j];
                if (need_v) {
                  double* gvj = gvv.data() + (kb + j) * vv.cols() + h * dv;
                  for (std::size_t c = 0; c < dv; ++c) gvj[c] += pi[j] * gi[c];
                }
              }
              if (!need_q && !need_k) continue;
              const double* qi = qv.data() + (qb + i) * qv.cols() + h * dk;
              double* gqi = gq.data() + (qb + i) * qv.cols() + h * dk;
              for (std::size_t j = 0; j < nk; ++j) {
                const double ds = pi[j] * (dscore[j] - weighted) * scale_factor;
                const double* kj = kv.data() + (kb + j) * kv.cols() + h * dk;
                double* gkj = gk.data() + (kb + j) * kv.cols() + h * dk;
                for (std::size_t c = 0; c < dk; ++c) {
                  gqi[c] += ds * kj[c];
                  gkj[c] += ds * qi[c];
                }
              }
            }
          }
        }
        if (need_q) tp.accumulate(q, gq);
        if (need_k) tp.accumulate(k, gk);
        if (need_v) tp.accumulate(v, gvv);
      },
      "segment_attention");
}

Tensor xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

void adam_step(ParamStore& store, const AdamOptions& options) {
  const std::int64_t step = store.step_count() + 1;
  store.set_step_count(step);
  const double correction1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
  for (auto& [name, p] : store.params()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.first_moment[i] = options.beta1 * p.first_moment[i] + (1.0 - options.beta1) * g;
      p.second_moment[i] = options.beta2 * p.second_moment[i] + (1.0 - options.beta2) * g * g;
      const double m_hat = p.first_moment[i] / correction1;
      const double v_hat = p.second_moment[i] / correction2;
      p.value[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

}  // namespace whatsnet::ad
