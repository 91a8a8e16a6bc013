#pragma once

#include <cstdint>
#include <vector>

#include "vistag/tensor.hpp"

namespace vistag {

/// Per-pixel scalar instance tags over a clip, shape T×Ht×Wt×1, values in
/// [0,1] when produced by the network (sigmoid-bounded).
struct TagVolume {
  TensorF tags;

  int frames() const { return tags.extent(0); }
  int height() const { return tags.extent(1); }
  int width() const { return tags.extent(2); }
};

/// One annotated instance: stable id, class id, and a 0/1 mask per frame.
struct InstanceMasks {
  int instance_id = 0;
  int class_id = 0;
  /// frames[t] has height*width entries; empty vector means absent that frame.
  std::vector<std::vector<std::uint8_t>> frames;

  std::int64_t pixel_count() const;
  std::int64_t pixel_count(int frame) const;
};

/// Ground-truth instance annotation for a clip. Masks of distinct instances
/// are disjoint within a frame.
struct InstanceGT {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<InstanceMasks> instances;

  /// Average-pool the masks down to (height/f)×(width/f) with majority rule;
  /// instances that end up empty are dropped.
  InstanceGT downsample(int factor) const;
  /// Per-pixel class ids (0 = background), flattened T*H*W.
  std::vector<int> class_mask() const;
  bool masks_disjoint() const;
};

struct LossConfig {
  double margin_g = 3.0;     // paper margin G
  int samples_m_prime = 64;  // sampled pixels per instance in the intra loss
  int subset_n_prime = 8;    // instance subset size in the separation loss
  double w_spectra = 1.0;
  double w_specter = 1.0;
  double w_tempra = 1.0;
  double w_temper = 1.0;
  std::uint64_t rng_seed = 0;
};

struct LossBreakdown {
  double l_spectra = 0.0;
  double l_specter = 0.0;
  double l_tempra = 0.0;
  double l_temper = 0.0;
  double l_tag = 0.0;
  double l_crossentropy = 0.0;
  double l_overall = 0.0;
};

struct LossResult {
  double value = 0.0;
  TensorF grad; // same shape as the tags (or prediction) it differentiates
};

struct TaggingLossResult {
  LossBreakdown breakdown; // cross-entropy fields left at zero
  TensorF grad;
};

/// Mean tag of one instance; frame == -1 averages over the whole clip (h_n),
/// otherwise over a single frame (h_nt). Throws LabelError on an empty set.
double mean_tag(const TagVolume& tags, const InstanceMasks& inst, int frame = -1);

/// Pulls sampled pixel tags of each instance toward the instance's clip mean.
LossResult spatial_intra_loss(const TagVolume& tags, const InstanceGT& gt,
                              const LossConfig& cfg);

/// Hinge pushing clip-level mean tags of distinct instances at least G apart.
LossResult spatial_inter_loss(const TagVolume& tags, const InstanceGT& gt,
                              const LossConfig& cfg);

/// Pulls per-frame instance means toward the clip-level mean.
LossResult temporal_grouping_loss(const TagVolume& tags, const InstanceGT& gt);

/// Per-frame hinge separating different instances' mean tags over time.
LossResult temporal_separation_loss(const TagVolume& tags, const InstanceGT& gt,
                                    const LossConfig& cfg);

/// Weighted sum of the four tagging terms plus the summed gradient.
TaggingLossResult tagging_loss(const TagVolume& tags, const InstanceGT& gt,
                               const LossConfig& cfg);

/// Mean per-pixel softmax cross-entropy. pred is T×H×W×(C+1) scores, labels
/// holds one class id per pixel (0 = background), flattened T*H*W.
LossResult crossentropy_loss(const TensorF& pred, const std::vector<int>& labels);

} // namespace vistag
