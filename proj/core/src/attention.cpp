#include "whatsnet/attention.hpp"

#include "whatsnet/error.hpp"

namespace whatsnet {

using ad::Segments;
using ad::Tensor;
using ad::Var;

void register_mab(ad::ParamStore& store, const std::string& prefix, std::size_t width, std::mt19937_64& rng) {
  using namespace mab_names;
  store.add(wq(prefix), ad::xavier_uniform(width, width, rng));
  store.add(wk(prefix), ad::xavier_uniform(width, width, rng));
  store.add(wv(prefix), ad::xavier_uniform(width, width, rng));
  store.add(ffn_w1(prefix), ad::xavier_uniform(width, width, rng));
  store.add(ffn_b1(prefix), Tensor(1, width));
  store.add(ffn_w2(prefix), ad::xavier_uniform(width, width, rng));
  store.add(ffn_b2(prefix), Tensor(1, width));
  store.add(ln1_gain(prefix), Tensor(1, width, 1.0));
  store.add(ln1_bias(prefix), Tensor(1, width));
  store.add(ln2_gain(prefix), Tensor(1, width, 1.0));
  store.add(ln2_bias(prefix), Tensor(1, width));
}

void register_within_att(ad::ParamStore& store, const std::string& prefix, std::size_t width,
                         std::size_t inducing_points, std::mt19937_64& rng) {
  if (inducing_points == 0) throw Error("within_att needs at least one inducing point");
  store.add(inducing_name(prefix), ad::xavier_uniform(inducing_points, width, rng));
  register_mab(store, inner_mab_prefix(prefix), width, rng);
  register_mab(store, outer_mab_prefix(prefix), width, rng);
}

std::size_t mab_param_count(std::size_t width) { return 5 * width * width + 6 * width; }

std::size_t within_att_param_count(std::size_t width, std::size_t inducing_points) {
  return inducing_points * width + 2 * mab_param_count(width);
}

Var sdpa(Var q, Var k, Var v) {
  Segments qs;
  qs.push(q.rows());
  Segments ks;
  ks.push(k.rows());
  return ad::segment_attention(q, k, v, qs, ks, 1);
}

Var multihead(ForwardContext& ctx, const std::string& prefix, Var q, Var k, Var v, const Segments& q_segments,
              const Segments& k_segments) {
  using namespace mab_names;
  const std::size_t width = q.cols();
  if (ctx.heads == 0 || width % ctx.heads != 0) {
    throw Error("multihead: width " + std::to_string(width) + " not divisible by " + std::to_string(ctx.heads) +
                " heads");
  }
  Var qp = ad::matmul(q, ctx.param(wq(prefix)));
  Var kp = ad::matmul(k, ctx.param(wk(prefix)));
  Var vp = ad::matmul(v, ctx.param(wv(prefix)));
  return ad::segment_attention(qp, kp, vp, q_segments, k_segments, ctx.heads);
}

Var mab(ForwardContext& ctx, const std::string& prefix, Var q, Var k, const Segments& q_segments,
        const Segments& k_segments) {
  using namespace mab_names;
  if (q.cols() != k.cols()) throw Error("mab: query width differs from key width");
  Var attended = multihead(ctx, prefix, q, k, k, q_segments, k_segments);
  Var h = ad::layer_norm(ad::add(q, attended), ctx.param(ln1_gain(prefix)), ctx.param(ln1_bias(prefix)));
  Var hidden = ad::relu(ad::broadcast_row_add(ad::matmul(h, ctx.param(ffn_w1(prefix))), ctx.param(ffn_b1(prefix))));
  Var ffn = ad::broadcast_row_add(ad::matmul(hidden, ctx.param(ffn_w2(prefix))), ctx.param(ffn_b2(prefix)));
  ffn = ad::dropout(ffn, ctx.dropout, ctx.training, ctx.rng);
  return ad::layer_norm(ad::add(h, ffn), ctx.param(ln2_gain(prefix)), ctx.param(ln2_bias(prefix)));
}

Var within_att(ForwardContext& ctx, const std::string& prefix, Var sets, const Segments& segments) {
  Var inducing = ctx.param(inducing_name(prefix));
  const std::size_t m = inducing.rows();
  std::vector<std::size_t> tiled;
  tiled.reserve(segments.count() * m);
  for (std::size_t s = 0; s < segments.count(); ++s) {
    if (segments.size(s) == 0) throw Error("within_att: empty set");
    for (std::size_t i = 0; i < m; ++i) tiled.push_back(i);
  }
  const Segments summary_segments = Segments::uniform(segments.count(), m);
  Var queries = ad::gather_rows(inducing, tiled);
  Var summary = mab(ctx, inner_mab_prefix(prefix), queries, sets, summary_segments, segments);
  return mab(ctx, outer_mab_prefix(prefix), sets, summary, segments, summary_segments);
}

}  // namespace whatsnet
