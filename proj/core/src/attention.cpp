#include "vistag/attention.hpp"

#include "vistag/errors.hpp"

namespace vistag {

namespace {

void check_feature_input(const TensorF& x, const char* who) {
  if (x.rank() != 4)
    throw DimensionError(std::string(who) + ": expected T×H×W×C, got " + x.shape_str());
}

void check_weights(const TensorF& x, const AttentionWeights& w, const char* who) {
  const int c = x.extent(3);
  if (w.wq.rank() != 2 || w.wk.rank() != 2 || w.wv.rank() != 2 || w.wo.rank() != 2)
    throw ConfigError(std::string(who) + ": projection weights must be matrices");
  if (w.wq.extent(0) != c || w.wk.extent(0) != c || w.wv.extent(0) != c)
    throw ConfigError(std::string(who) + ": projections expect " +
                      std::to_string(w.wq.extent(0)) + " channels, input has " +
                      std::to_string(c));
  if (w.wq.extent(1) != w.wk.extent(1))
    throw ConfigError(std::string(who) + ": query/key widths differ");
  if (w.wo.extent(0) != w.wv.extent(1))
    throw ConfigError(std::string(who) + ": output projection expects value width");
}

// One frame as an S×C matrix, rows in scanline order.
TensorF frame_matrix(const TensorF& x, int t) {
  const int H = x.extent(1), W = x.extent(2), C = x.extent(3);
  TensorF m({H * W, C});
  const double* src = x.data() + static_cast<std::int64_t>(t) * H * W * C;
  std::copy(src, src + static_cast<std::int64_t>(H) * W * C, m.data());
  return m;
}

void store_frame(TensorF& x, int t, const TensorF& m) {
  const int H = x.extent(1), W = x.extent(2), C = x.extent(3);
  double* dst = x.data() + static_cast<std::int64_t>(t) * H * W * C;
  std::copy(m.data(), m.data() + m.size(), dst);
}

void accumulate_frame(TensorF& x, int t, const TensorF& m) {
  const int H = x.extent(1), W = x.extent(2), C = x.extent(3);
  double* dst = x.data() + static_cast<std::int64_t>(t) * H * W * C;
  for (std::int64_t i = 0; i < m.size(); ++i) dst[i] += m[i];
}

// Y = X*W + b (b broadcast over rows).
TensorF linear(const TensorF& x, const TensorF& w, const TensorF& b) {
  TensorF y = matmul(x, w);
  const int rows = y.extent(0), cols = y.extent(1);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) y.at(i, j) += b[j];
  return y;
}

void linear_backward(const TensorF& x, const TensorF& w, const TensorF& dy,
                     TensorF& dx_acc, TensorF& dw_acc, TensorF& db_acc) {
  TensorF dx, dw;
  matmul_backward(x, w, dy, dx, dw);
  add_in_place(dx_acc, dx);
  add_in_place(dw_acc, dw);
  const int rows = dy.extent(0), cols = dy.extent(1);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) db_acc[j] += dy.at(i, j);
}

TensorF transpose(const TensorF& a) {
  const int m = a.extent(0), n = a.extent(1);
  TensorF t({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

// Shared forward: cross_frame=true pools attended values from all query
// frames, cross_frame=false is plain per-frame self-attention.
TensorF attention_forward(const TensorF& x, const AttentionWeights& w, bool cross_frame) {
  check_feature_input(x, "attention");
  check_weights(x, w, "attention");
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2);
  const int cout = w.wo.extent(1);
  TensorF y({T, H, W, cout});

  std::vector<TensorF> queries;
  if (cross_frame) {
    queries.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t)
      queries.push_back(linear(frame_matrix(x, t), w.wq, w.bq));
  }

  for (int i = 0; i < T; ++i) {
    const TensorF xi = frame_matrix(x, i);
    const TensorF key = linear(xi, w.wk, w.bk);
    const TensorF value = linear(xi, w.wv, w.bv);
    const TensorF key_t = transpose(key);

    TensorF pooled({xi.extent(0), value.extent(1)});
    const int tq_count = cross_frame ? T : 1;
    for (int t = 0; t < tq_count; ++t) {
      const TensorF query =
          cross_frame ? queries[static_cast<std::size_t>(t)] : linear(xi, w.wq, w.bq);
      const TensorF attn = softmax_rows(matmul(query, key_t));
      add_in_place(pooled, matmul(attn, value));
    }
    if (tq_count > 1) pooled = scale(pooled, 1.0 / tq_count);

    store_frame(y, i, linear(pooled, w.wo, w.bo));
  }
  return y;
}

AttentionGrads attention_backward(const TensorF& x, const AttentionWeights& w,
                                  const TensorF& dy, bool cross_frame) {
  check_feature_input(x, "attention_backward");
  check_weights(x, w, "attention_backward");
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2);
  const int cout = w.wo.extent(1);
  if (dy.rank() != 4 || dy.extent(0) != T || dy.extent(1) != H || dy.extent(2) != W ||
      dy.extent(3) != cout)
    throw DimensionError("attention_backward: dy shape " + dy.shape_str());

  AttentionGrads g;
  g.dx = TensorF(x.shape());
  g.dw.wq = TensorF(w.wq.shape());
  g.dw.bq = TensorF(w.bq.shape());
  g.dw.wk = TensorF(w.wk.shape());
  g.dw.bk = TensorF(w.bk.shape());
  g.dw.wv = TensorF(w.wv.shape());
  g.dw.bv = TensorF(w.bv.shape());
  g.dw.wo = TensorF(w.wo.shape());
  g.dw.bo = TensorF(w.bo.shape());

  std::vector<TensorF> frames, queries;
  frames.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) frames.push_back(frame_matrix(x, t));
  if (cross_frame) {
    queries.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) queries.push_back(linear(frames[static_cast<std::size_t>(t)], w.wq, w.bq));
  }
  std::vector<TensorF> dquery(static_cast<std::size_t>(T));

  for (int i = 0; i < T; ++i) {
    const TensorF& xi = frames[static_cast<std::size_t>(i)];
    const TensorF key = linear(xi, w.wk, w.bk);
    const TensorF value = linear(xi, w.wv, w.bv);
    const TensorF key_t = transpose(key);
    const int tq_count = cross_frame ? T : 1;

    // Recompute the pooled value to get the output-projection grads.
    TensorF pooled({xi.extent(0), value.extent(1)});
    std::vector<TensorF> attns;
    attns.reserve(static_cast<std::size_t>(tq_count));
    for (int t = 0; t < tq_count; ++t) {
      const TensorF& query =
          cross_frame ? queries[static_cast<std::size_t>(t)] : queries.emplace_back(linear(xi, w.wq, w.bq));
      attns.push_back(softmax_rows(matmul(query, key_t)));
      add_in_place(pooled, matmul(attns.back(), value));
    }
    if (tq_count > 1) pooled = scale(pooled, 1.0 / tq_count);

    const TensorF dyi = frame_matrix(dy, i);
    TensorF dpooled({pooled.extent(0), pooled.extent(1)});
    {
      TensorF dwo_local, dpool_local;
      matmul_backward(pooled, w.wo, dyi, dpool_local, dwo_local);
      add_in_place(g.dw.wo, dwo_local);
      add_in_place(dpooled, dpool_local);
      for (int r = 0; r < dyi.extent(0); ++r)
        for (int c = 0; c < dyi.extent(1); ++c) g.dw.bo[c] += dyi.at(r, c);
    }
    if (tq_count > 1) dpooled = scale(dpooled, 1.0 / tq_count);

    TensorF dkey(key.shape());
    TensorF dvalue(value.shape());
    for (int t = 0; t < tq_count; ++t) {
      const TensorF& attn = attns[static_cast<std::size_t>(t)];
      const TensorF& query = cross_frame ? queries[static_cast<std::size_t>(t)]
                                         : queries[static_cast<std::size_t>(i)];
      // pooled += attn * value
      TensorF dattn, dval_local;
      matmul_backward(attn, value, dpooled, dattn, dval_local);
      add_in_place(dvalue, dval_local);
      const TensorF dscores = softmax_rows_backward(attn, dattn);
      // scores = query * key^T
      TensorF dq_local, dkt_local;
      matmul_backward(query, key_t, dscores, dq_local, dkt_local);
      add_in_place(dkey, transpose(dkt_local));
      if (cross_frame) {
        if (dquery[static_cast<std::size_t>(t)].size() == 0)
          dquery[static_cast<std::size_t>(t)] = TensorF(dq_local.shape());
        add_in_place(dquery[static_cast<std::size_t>(t)], dq_local);
      } else {
        if (dquery[static_cast<std::size_t>(i)].size() == 0)
          dquery[static_cast<std::size_t>(i)] = TensorF(dq_local.shape());
        add_in_place(dquery[static_cast<std::size_t>(i)], dq_local);
      }
    }

    // Key/value projections pull gradient into the target frame.
    TensorF dxi(xi.shape());
    linear_backward(xi, w.wk, dkey, dxi, g.dw.wk, g.dw.bk);
    linear_backward(xi, w.wv, dvalue, dxi, g.dw.wv, g.dw.bv);
    accumulate_frame(g.dx, i, dxi);
  }

  // Query projections pull gradient into every query frame.
  for (int t = 0; t < T; ++t) {
    if (dquery[static_cast<std::size_t>(t)].size() == 0) continue;
    TensorF dxt({H * W, x.extent(3)});
    linear_backward(frames[static_cast<std::size_t>(t)], w.wq,
                    dquery[static_cast<std::size_t>(t)], dxt, g.dw.wq, g.dw.bq);
    accumulate_frame(g.dx, t, dxt);
  }
  return g;
}

} // namespace

AttentionWeights AttentionWeights::zeros(int cin, int d, int dv, int cout) {
  AttentionWeights w;
  w.wq = TensorF({cin, d});
  w.bq = TensorF({d});
  w.wk = TensorF({cin, d});
  w.bk = TensorF({d});
  w.wv = TensorF({cin, dv});
  w.bv = TensorF({dv});
  w.wo = TensorF({dv, cout});
  w.bo = TensorF({cout});
  return w;
}

TagAttentionWeights TagAttentionWeights::zeros(int ce, int d, int dv, int cout) {
  TagAttentionWeights w;
  w.we = TensorF({1, ce});
  w.be = TensorF({ce});
  w.attn = AttentionWeights::zeros(ce, d, dv, cout);
  return w;
}

TensorF add_coordinate_channels(const TensorF& f) {
  check_feature_input(f, "add_coordinate_channels");
  const int T = f.extent(0), H = f.extent(1), W = f.extent(2), C = f.extent(3);
  TensorF y({T, H, W, C + 2});
  for (int t = 0; t < T; ++t)
    for (int h = 0; h < H; ++h) {
      const double cy = H > 1 ? -1.0 + 2.0 * h / (H - 1) : 0.0;
      for (int x = 0; x < W; ++x) {
        const double cx = W > 1 ? -1.0 + 2.0 * x / (W - 1) : 0.0;
        for (int c = 0; c < C; ++c) y.at(t, h, x, c) = f.at(t, h, x, c);
        y.at(t, h, x, C) = cx;
        y.at(t, h, x, C + 1) = cy;
      }
    }
  return y;
}

TensorF add_coordinate_channels_backward(const TensorF& dy) {
  check_feature_input(dy, "add_coordinate_channels_backward");
  const int T = dy.extent(0), H = dy.extent(1), W = dy.extent(2), C = dy.extent(3) - 2;
  if (C < 0) throw DimensionError("add_coordinate_channels_backward: too few channels");
  TensorF dx({T, H, W, C});
  for (int t = 0; t < T; ++t)
    for (int h = 0; h < H; ++h)
      for (int x = 0; x < W; ++x)
        for (int c = 0; c < C; ++c) dx.at(t, h, x, c) = dy.at(t, h, x, c);
  return dx;
}

TensorF attention_map(const TensorF& x, int query_frame, int key_frame,
                      const AttentionWeights& w) {
  check_feature_input(x, "attention_map");
  check_weights(x, w, "attention_map");
  const TensorF query = linear(frame_matrix(x, query_frame), w.wq, w.bq);
  const TensorF key = linear(frame_matrix(x, key_frame), w.wk, w.bk);
  return softmax_rows(matmul(query, transpose(key)));
}

TensorF spatio_temporal_attention(const TensorF& f, const AttentionWeights& w) {
  return attention_forward(f, w, /*cross_frame=*/true);
}

AttentionGrads spatio_temporal_attention_backward(const TensorF& f,
                                                  const AttentionWeights& w,
                                                  const TensorF& dy) {
  return attention_backward(f, w, dy, /*cross_frame=*/true);
}

TensorF self_attention(const TensorF& q, const AttentionWeights& w) {
  return attention_forward(q, w, /*cross_frame=*/false);
}

AttentionGrads self_attention_backward(const TensorF& q, const AttentionWeights& w,
                                       const TensorF& dy) {
  return attention_backward(q, w, dy, /*cross_frame=*/false);
}

TensorF tag_based_attention(const TensorF& tags, const TagAttentionWeights& w,
                            int feat_h, int feat_w) {
  check_feature_input(tags, "tag_based_attention");
  if (tags.extent(1) % feat_h != 0 || tags.extent(2) % feat_w != 0)
    throw ConfigError("tag_based_attention: tag resolution " + tags.shape_str() +
                      " is not a multiple of " + std::to_string(feat_h) + "x" +
                      std::to_string(feat_w));
  const int fh = tags.extent(1) / feat_h, fw = tags.extent(2) / feat_w;
  const TensorF pooled = avg_pool_spatial(tags, fh, fw);
  // Expand pooled 1-channel tags to ce channels, frame by frame.
  const int T = pooled.extent(0);
  const int ce = w.we.extent(1);
  TensorF expanded({T, feat_h, feat_w, ce});
  for (int t = 0; t < T; ++t)
    store_frame(expanded, t, linear(frame_matrix(pooled, t), w.we, w.be));
  return attention_forward(expanded, w.attn, /*cross_frame=*/true);
}

TagAttentionGrads tag_based_attention_backward(const TensorF& tags,
                                               const TagAttentionWeights& w,
                                               int feat_h, int feat_w,
                                               const TensorF& dy) {
  const int fh = tags.extent(1) / feat_h, fw = tags.extent(2) / feat_w;
  const TensorF pooled = avg_pool_spatial(tags, fh, fw);
  const int T = pooled.extent(0);
  const int ce = w.we.extent(1);
  TensorF expanded({T, feat_h, feat_w, ce});
  for (int t = 0; t < T; ++t)
    store_frame(expanded, t, linear(frame_matrix(pooled, t), w.we, w.be));

  TagAttentionGrads g;
  g.dw = TagAttentionWeights::zeros(ce, w.attn.wq.extent(1), w.attn.wv.extent(1),
                                    w.attn.wo.extent(1));
  AttentionGrads ag = attention_backward(expanded, w.attn, dy, /*cross_frame=*/true);
  g.dw.attn = std::move(ag.dw);

  TensorF dpooled(pooled.shape());
  for (int t = 0; t < T; ++t) {
    TensorF dp({feat_h * feat_w, 1});
    linear_backward(frame_matrix(pooled, t), w.we, frame_matrix(ag.dx, t), dp, g.dw.we,
                    g.dw.be);
    store_frame(dpooled, t, dp);
  }
  g.dtags = avg_pool_spatial_backward(dpooled, fh, fw);
  return g;
}

} // namespace vistag
