#pragma once

#include "vistag/tensor.hpp"

namespace vistag {

/// Learned 1×1 projections for one attention module. Stored as matrices:
/// wq,wk: Cin×d, wv: Cin×dv, wo: dv×Cout, biases are the matching row vectors.
struct AttentionWeights {
  TensorF wq, bq;
  TensorF wk, bk;
  TensorF wv, bv;
  TensorF wo, bo;

  static AttentionWeights zeros(int cin, int d, int dv, int cout);
};

struct AttentionGrads {
  TensorF dx;
  AttentionWeights dw;
};

/// Tag-based attention first expands pooled 1-channel tags to `ce` channels.
struct TagAttentionWeights {
  TensorF we, be; // 1×ce expansion
  AttentionWeights attn;

  static TagAttentionWeights zeros(int ce, int d, int dv, int cout);
};

struct TagAttentionGrads {
  TensorF dtags;
  TagAttentionWeights dw;
};

/// Appends x and y coordinate maps normalized to [-1,1]: T×H×W×C -> T×H×W×(C+2).
TensorF add_coordinate_channels(const TensorF& f);
/// Gradient pass-through that drops the two coordinate channels.
TensorF add_coordinate_channels_backward(const TensorF& dy);

/// Softmax-normalized map between one query frame and one key frame,
/// rows = query positions, cols = key positions.
TensorF attention_map(const TensorF& x, int query_frame, int key_frame,
                      const AttentionWeights& w);

/// Cross-frame attention: for each target frame the key/value come from that
/// frame, queries from every frame; per query frame the normalized map
/// weight-averages the value, and the stack is mean-pooled over time.
TensorF spatio_temporal_attention(const TensorF& f, const AttentionWeights& w);
AttentionGrads spatio_temporal_attention_backward(const TensorF& f,
                                                  const AttentionWeights& w,
                                                  const TensorF& dy);

/// Per-frame non-local attention; query/key/value all from the same frame.
TensorF self_attention(const TensorF& q, const AttentionWeights& w);
AttentionGrads self_attention_backward(const TensorF& q, const AttentionWeights& w,
                                       const TensorF& dy);

/// Tags are average-pooled to feat_h×feat_w, expanded to ce channels, then
/// run through the same cross-frame wiring as spatio_temporal_attention.
TensorF tag_based_attention(const TensorF& tags, const TagAttentionWeights& w,
                            int feat_h, int feat_w);
TagAttentionGrads tag_based_attention_backward(const TensorF& tags,
                                               const TagAttentionWeights& w,
                                               int feat_h, int feat_w,
                                               const TensorF& dy);

} // namespace vistag
