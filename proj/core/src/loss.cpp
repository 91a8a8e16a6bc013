#include "vistag/loss.hpp"

#include <cmath>
#include <iostream>

#include "vistag/errors.hpp"
#include "vistag/rng.hpp"

namespace vistag {

namespace {

// Pixel bookkeeping for one instance at tag resolution: flat indices into the
// tag volume, total and per frame.
struct InstPixels {
  std::vector<std::int64_t> all;
  std::vector<std::vector<std::int64_t>> by_frame;
};

void check_tags_vs_gt(const TagVolume& tags, const InstanceGT& gt) {
  if (tags.tags.rank() != 4 || tags.tags.extent(3) != 1)
    throw DimensionError("tag volume must be T×H×W×1, got " + tags.tags.shape_str());
  if (tags.frames() != gt.frames || tags.height() != gt.height ||
      tags.width() != gt.width)
    throw DimensionError("tag volume " + tags.tags.shape_str() +
                         " does not match ground truth " + std::to_string(gt.frames) +
                         "x" + std::to_string(gt.height) + "x" + std::to_string(gt.width));
}

InstPixels collect_pixels(const InstanceMasks& inst, int T, int H, int W) {
  InstPixels p;
  p.by_frame.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto& mask = t < static_cast<int>(inst.frames.size()) ? inst.frames[t]
                                                                : std::vector<std::uint8_t>{};
    if (mask.empty()) continue;
    for (int i = 0; i < H * W; ++i) {
      if (mask[static_cast<std::size_t>(i)]) {
        const std::int64_t flat = static_cast<std::int64_t>(t) * H * W + i;
        p.all.push_back(flat);
        p.by_frame[static_cast<std::size_t>(t)].push_back(flat);
      }
    }
  }
  return p;
}

double mean_over(const TensorF& tags, const std::vector<std::int64_t>& idx) {
  double acc = 0.0;
  for (std::int64_t i : idx) acc += tags[i];
  return acc / static_cast<double>(idx.size());
}

// Instances that survive at this resolution, with their pixels.
std::vector<InstPixels> live_instances(const TagVolume& tags, const InstanceGT& gt) {
  std::vector<InstPixels> out;
  for (const auto& inst : gt.instances) {
    InstPixels p = collect_pixels(inst, gt.frames, gt.height, gt.width);
    if (!p.all.empty()) out.push_back(std::move(p));
  }
  (void)tags;
  return out;
}

std::vector<std::int64_t> sample_without_replacement(const std::vector<std::int64_t>& pool,
                                                     int count, Rng rng) {
  std::vector<std::int64_t> idx = pool;
  const int n = static_cast<int>(idx.size());
  const int take = count < n ? count : n;
  for (int i = 0; i < take; ++i) {
    const std::int64_t j = i + rng.uniform_int(n - i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(take));
  return idx;
}

double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace

std::int64_t InstanceMasks::pixel_count() const {
  std::int64_t n = 0;
  for (const auto& f : frames)
    for (std::uint8_t v : f) n += v ? 1 : 0;
  return n;
}

std::int64_t InstanceMasks::pixel_count(int frame) const {
  if (frame < 0 || frame >= static_cast<int>(frames.size())) return 0;
  std::int64_t n = 0;
  for (std::uint8_t v : frames[static_cast<std::size_t>(frame)]) n += v ? 1 : 0;
  return n;
}

InstanceGT InstanceGT::downsample(int factor) const {
  if (factor <= 0 || height % factor != 0 || width % factor != 0)
    throw ConfigError("InstanceGT::downsample: factor " + std::to_string(factor) +
                      " does not divide " + std::to_string(height) + "x" +
                      std::to_string(width));
  InstanceGT out;
  out.frames = frames;
  out.height = height / factor;
  out.width = width / factor;
  const int half = factor * factor / 2;
  for (const auto& inst : instances) {
    InstanceMasks m;
    m.instance_id = inst.instance_id;
    m.class_id = inst.class_id;
    m.frames.resize(static_cast<std::size_t>(frames));
    std::int64_t total = 0;
    for (int t = 0; t < frames; ++t) {
      if (t >= static_cast<int>(inst.frames.size()) || inst.frames[t].empty()) continue;
      std::vector<std::uint8_t> down(static_cast<std::size_t>(out.height) * out.width, 0);
      bool any = false;
      for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
          int hits = 0;
          for (int dy = 0; dy < factor; ++dy)
            for (int dx = 0; dx < factor; ++dx)
              hits += inst.frames[t][static_cast<std::size_t>(y * factor + dy) * width +
                                     (x * factor + dx)];
          if (hits > half) {
            down[static_cast<std::size_t>(y) * out.width + x] = 1;
            any = true;
          }
        }
      if (any) {
        total += 1;
        m.frames[static_cast<std::size_t>(t)] = std::move(down);
      }
    }
    if (total > 0) out.instances.push_back(std::move(m));
  }
  return out;
}

std::vector<int> InstanceGT::class_mask() const {
  std::vector<int> ids(static_cast<std::size_t>(frames) * height * width, 0);
  for (const auto& inst : instances)
    for (int t = 0; t < static_cast<int>(inst.frames.size()); ++t) {
      const auto& mask = inst.frames[static_cast<std::size_t>(t)];
      if (mask.empty()) continue;
      for (int i = 0; i < height * width; ++i)
        if (mask[static_cast<std::size_t>(i)])
          ids[static_cast<std::size_t>(t) * height * width + i] = inst.class_id;
    }
  return ids;
}

bool InstanceGT::masks_disjoint() const {
  std::vector<std::uint8_t> seen;
  for (int t = 0; t < frames; ++t) {
    seen.assign(static_cast<std::size_t>(height) * width, 0);
    for (const auto& inst : instances) {
      if (t >= static_cast<int>(inst.frames.size()) || inst.frames[t].empty()) continue;
      for (int i = 0; i < height * width; ++i)
        if (inst.frames[t][static_cast<std::size_t>(i)]) {
          if (seen[static_cast<std::size_t>(i)]) return false;
          seen[static_cast<std::size_t>(i)] = 1;
        }
    }
  }
  return true;
}

double mean_tag(const TagVolume& tags, const InstanceMasks& inst, int frame) {
  const int T = tags.frames(), H = tags.height(), W = tags.width();
  InstPixels p = collect_pixels(inst, T, H, W);
  if (frame < 0) {
    if (p.all.empty()) throw LabelError("mean_tag: instance has no pixels in clip");
    return mean_over(tags.tags, p.all);
  }
  if (frame >= T || p.by_frame[static_cast<std::size_t>(frame)].empty())
    throw LabelError("mean_tag: instance absent in frame " + std::to_string(frame));
  return mean_over(tags.tags, p.by_frame[static_cast<std::size_t>(frame)]);
}

LossResult spatial_intra_loss(const TagVolume& tags, const InstanceGT& gt,
                              const LossConfig& cfg) {
  check_tags_vs_gt(tags, gt);
  LossResult r;
  r.grad = TensorF(tags.tags.shape());
  const std::vector<InstPixels> insts = live_instances(tags, gt);
  const int N = static_cast<int>(insts.size());
  if (N == 0) {
    std::cerr << "vistag: spatial_intra_loss on clip without instances\n";
    return r;
  }
  const Rng base(cfg.rng_seed);
  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    const InstPixels& p = insts[static_cast<std::size_t>(n)];
    const double m_total = static_cast<double>(p.all.size());
    const double h_n = mean_over(tags.tags, p.all);
    const std::vector<std::int64_t> sampled = sample_without_replacement(
        p.all, cfg.samples_m_prime, base.derive(0x01, static_cast<std::uint64_t>(n)));
    double sum_diff = 0.0;
    for (std::int64_t s : sampled) {
      const double d = h_n - tags.tags[s];
      total += d * d;
      sum_diff += d;
      r.grad[s] += -2.0 * d / N;
    }
    // Every instance pixel also moves h_n itself.
    const double through_mean = 2.0 * sum_diff / (N * m_total);
    for (std::int64_t q : p.all) r.grad[q] += through_mean;
  }
  r.value = total / N;
  return r;
}

LossResult spatial_inter_loss(const TagVolume& tags, const InstanceGT& gt,
                              const LossConfig& cfg) {
  check_tags_vs_gt(tags, gt);
  LossResult r;
  r.grad = TensorF(tags.tags.shape());
  const std::vector<InstPixels> insts = live_instances(tags, gt);
  const int N = static_cast<int>(insts.size());
  if (N < 2) return r;
  std::vector<double> h(insts.size());
  for (std::size_t n = 0; n < insts.size(); ++n) h[n] = mean_over(tags.tags, insts[n].all);

  double total = 0.0;
  for (int n = 0; n < N - 1; ++n) {
    for (int n2 = n + 1; n2 < N; ++n2) {
      const double delta = h[static_cast<std::size_t>(n)] - h[static_cast<std::size_t>(n2)];
      const double hinge = cfg.margin_g - std::abs(delta);
      if (hinge <= 0.0) continue;
      total += hinge;
      const double s = sign_or_zero(delta); // subgradient 0 at both kinks
      if (s == 0.0) continue;
      const double gn = -s / static_cast<double>(insts[static_cast<std::size_t>(n)].all.size());
      const double gn2 = s / static_cast<double>(insts[static_cast<std::size_t>(n2)].all.size());
      for (std::int64_t q : insts[static_cast<std::size_t>(n)].all) r.grad[q] += gn;
      for (std::int64_t q : insts[static_cast<std::size_t>(n2)].all) r.grad[q] += gn2;
    }
  }
  r.value = total;
  return r;
}

LossResult temporal_grouping_loss(const TagVolume& tags, const InstanceGT& gt) {
  check_tags_vs_gt(tags, gt);
  LossResult r;
  r.grad = TensorF(tags.tags.shape());
  const std::vector<InstPixels> insts = live_instances(tags, gt);
  const int N = static_cast<int>(insts.size());
  if (N == 0) return r;
  const int T = gt.frames;

  double total = 0.0;
  for (const InstPixels& p : insts) {
    const double m_total = static_cast<double>(p.all.size());
    const double h_n = mean_over(tags.tags, p.all);
    double sum_diff = 0.0;
    for (int t = 0; t < T; ++t) {
      const auto& fp = p.by_frame[static_cast<std::size_t>(t)];
      if (fp.empty()) continue; // absent frames skipped
      const double h_nt = mean_over(tags.tags, fp);
      const double d = h_n - h_nt;
      total += d * d;
      sum_diff += d;
      const double g_frame = -2.0 * d / (N * static_cast<double>(fp.size()));
      for (std::int64_t q : fp) r.grad[q] += g_frame;
    }
    const double through_mean = 2.0 * sum_diff / (N * m_total);
    for (std::int64_t q : p.all) r.grad[q] += through_mean;
  }
  r.value = total / N;
  return r;
}

LossResult temporal_separation_loss(const TagVolume& tags, const InstanceGT& gt,
                                    const LossConfig& cfg) {
  check_tags_vs_gt(tags, gt);
  LossResult r;
  r.grad = TensorF(tags.tags.shape());
  const std::vector<InstPixels> insts = live_instances(tags, gt);
  const int N = static_cast<int>(insts.size());
  if (N < 2) return r;
  const int T = gt.frames;

  // Seeded subset of instance ordinals; partners n' are drawn from it.
  const int n_prime = cfg.subset_n_prime < N ? cfg.subset_n_prime : N;
  std::vector<std::int64_t> ordinals(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) ordinals[static_cast<std::size_t>(i)] = i;
  std::vector<std::int64_t> subset =
      sample_without_replacement(ordinals, n_prime, Rng(cfg.rng_seed).derive(0x05));
  std::vector<std::uint8_t> in_subset(static_cast<std::size_t>(N), 0);
  for (std::int64_t s : subset) in_subset[static_cast<std::size_t>(s)] = 1;

  // Per-frame means, NaN when absent.
  std::vector<std::vector<double>> h_t(insts.size(),
                                       std::vector<double>(static_cast<std::size_t>(T)));
  for (std::size_t n = 0; n < insts.size(); ++n)
    for (int t = 0; t < T; ++t) {
      const auto& fp = insts[n].by_frame[static_cast<std::size_t>(t)];
      h_t[n][static_cast<std::size_t>(t)] =
          fp.empty() ? std::nan("") : mean_over(tags.tags, fp);
    }

  double total = 0.0;
  for (int n2 = 0; n2 < N; ++n2) {
    if (!in_subset[static_cast<std::size_t>(n2)]) continue;
    for (int n = 0; n < n2; ++n) {
      for (int t = 0; t < T; ++t) {
        const double a = h_t[static_cast<std::size_t>(n)][static_cast<std::size_t>(t)];
        const double b = h_t[static_cast<std::size_t>(n2)][static_cast<std::size_t>(t)];
        if (std::isnan(a) || std::isnan(b)) continue;
        const double delta = a - b;
        const double hinge = cfg.margin_g - std::abs(delta);
        if (hinge <= 0.0) continue;
        total += hinge;
        const double s = sign_or_zero(delta);
        if (s == 0.0) continue;
        const auto& fpn = insts[static_cast<std::size_t>(n)].by_frame[static_cast<std::size_t>(t)];
        const auto& fpn2 =
            insts[static_cast<std::size_t>(n2)].by_frame[static_cast<std::size_t>(t)];
        const double gn = -s / static_cast<double>(fpn.size());
        const double gn2 = s / static_cast<double>(fpn2.size());
        for (std::int64_t q : fpn) r.grad[q] += gn;
        for (std::int64_t q : fpn2) r.grad[q] += gn2;
      }
    }
  }
  r.value = total;
  return r;
}

TaggingLossResult tagging_loss(const TagVolume& tags, const InstanceGT& gt,
                               const LossConfig& cfg) {
  TaggingLossResult out;
  const LossResult spectra = spatial_intra_loss(tags, gt, cfg);
  const LossResult specter = spatial_inter_loss(tags, gt, cfg);
  const LossResult tempra = temporal_grouping_loss(tags, gt);
  const LossResult temper = temporal_separation_loss(tags, gt, cfg);

  out.breakdown.l_spectra = cfg.w_spectra * spectra.value;
  out.breakdown.l_specter = cfg.w_specter * specter.value;
  out.breakdown.l_tempra = cfg.w_tempra * tempra.value;
  out.breakdown.l_temper = cfg.w_temper * temper.value;
  out.breakdown.l_tag = out.breakdown.l_spectra + out.breakdown.l_specter +
                        out.breakdown.l_tempra + out.breakdown.l_temper;
  out.breakdown.l_overall = out.breakdown.l_tag;

  out.grad = TensorF(tags.tags.shape());
  for (std::int64_t i = 0; i < out.grad.size(); ++i)
    out.grad[i] = cfg.w_spectra * spectra.grad[i] + cfg.w_specter * specter.grad[i] +
                  cfg.w_tempra * tempra.grad[i] + cfg.w_temper * temper.grad[i];
  return out;
}

LossResult crossentropy_loss(const TensorF& pred, const std::vector<int>& labels) {
  if (pred.rank() != 4) throw DimensionError("crossentropy_loss: pred must be rank 4");
  const int T = pred.extent(0), H = pred.extent(1), W = pred.extent(2);
  const int K = pred.extent(3);
  const std::int64_t pixels = static_cast<std::int64_t>(T) * H * W;
  if (static_cast<std::int64_t>(labels.size()) != pixels)
    throw DimensionError("crossentropy_loss: label count mismatch");

  LossResult r;
  r.grad = TensorF(pred.shape());
  double total = 0.0;
  std::vector<double> prob(static_cast<std::size_t>(K));
  for (std::int64_t p = 0; p < pixels; ++p) {
    const int label = labels[static_cast<std::size_t>(p)];
    if (label < 0 || label >= K)
      throw LabelError("crossentropy_loss: class id " + std::to_string(label) +
                       " out of range for " + std::to_string(K) + " channels");
    const double* row = pred.data() + p * K;
    double mx = row[0];
    for (int k = 1; k < K; ++k) mx = row[k] > mx ? row[k] : mx;
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      prob[static_cast<std::size_t>(k)] = std::exp(row[k] - mx);
      sum += prob[static_cast<std::size_t>(k)];
    }
    total += -(row[label] - mx - std::log(sum));
    double* grow = r.grad.data() + p * K;
    for (int k = 0; k < K; ++k) {
      const double soft = prob[static_cast<std::size_t>(k)] / sum;
      grow[k] = (soft - (k == label ? 1.0 : 0.0)) / static_cast<double>(pixels);
    }
  }
  r.value = total / static_cast<double>(pixels);
  return r;
}

} // namespace vistag
