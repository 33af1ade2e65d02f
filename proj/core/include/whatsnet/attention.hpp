#pragma once

#include <random>
#include <string>

#include "whatsnet/autodiff.hpp"

namespace whatsnet {

/// Everything a block needs while recording one forward pass.
struct ForwardContext {
  ad::Tape& tape;
  ad::ParamStore& store;
  std::size_t heads = 4;
  double dropout = 0.0;
  bool training = false;
  std::mt19937_64& rng;

  ad::Var param(const std::string& name) { return tape.param(store, name); }
};

// Parameter names under a block prefix. Per-head projections W^Q_i are the
// column blocks of one d x d matrix; W^O is the identity and has no entry.
namespace mab_names {
inline std::string wq(const std::string& p) { return p + ".wq"; }
inline std::string wk(const std::string& p) { return p + ".wk"; }
inline std::string wv(const std::string& p) { return p + ".wv"; }
inline std::string ffn_w1(const std::string& p) { return p + ".ffn.w1"; }
inline std::string ffn_b1(const std::string& p) { return p + ".ffn.b1"; }
inline std::string ffn_w2(const std::string& p) { return p + ".ffn.w2"; }
inline std::string ffn_b2(const std::string& p) { return p + ".ffn.b2"; }
inline std::string ln1_gain(const std::string& p) { return p + ".ln1.gain"; }
inline std::string ln1_bias(const std::string& p) { return p + ".ln1.bias"; }
inline std::string ln2_gain(const std::string& p) { return p + ".ln2.gain"; }
inline std::string ln2_bias(const std::string& p) { return p + ".ln2.bias"; }
}  // namespace mab_names

inline std::string inducing_name(const std::string& prefix) { return prefix + ".inducing"; }
inline std::string inner_mab_prefix(const std::string& prefix) { return prefix + ".inner"; }
inline std::string outer_mab_prefix(const std::string& prefix) { return prefix + ".outer"; }

/// Xavier weights, zero biases, unit LayerNorm gains.
void register_mab(ad::ParamStore& store, const std::string& prefix, std::size_t width, std::mt19937_64& rng);
void register_within_att(ad::ParamStore& store, const std::string& prefix, std::size_t width,
                         std::size_t inducing_points, std::mt19937_64& rng);

std::size_t mab_param_count(std::size_t width);
std::size_t within_att_param_count(std::size_t width, std::size_t inducing_points);

/// softmax(Q Kᵀ / sqrt(d_k)) V for a single set and a single head.
ad::Var sdpa(ad::Var q, ad::Var k, ad::Var v);

/// Multihead attention per segment pair: each head attends on its column
/// block of the projected inputs; heads are concatenated (W^O = I).
ad::Var multihead(ForwardContext& ctx, const std::string& prefix, ad::Var q, ad::Var k, ad::Var v,
                  const ad::Segments& q_segments, const ad::Segments& k_segments);

/// MAB(Q, K) = LayerNorm(H + FeedForward(H)), H = LayerNorm(Q + Multihead(Q, K, K)),
/// evaluated independently for each segment pair. Dropout hits the FFN output
/// before the residual.
ad::Var mab(ForwardContext& ctx, const std::string& prefix, ad::Var q, ad::Var k, const ad::Segments& q_segments,
            const ad::Segments& k_segments);

/// MAB(S, MAB(I_w, S)) for every set in `segments`, with the inducing points
/// I_w shared by all sets.
ad::Var within_att(ForwardContext& ctx, const std::string& prefix, ad::Var sets, const ad::Segments& segments);

}  // namespace whatsnet
