#include "vistag/tensor.hpp"

#include <cmath>
#include <sstream>

#include "vistag/errors.hpp"

namespace vistag {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int e : shape) {
    if (e < 0) throw DimensionError("negative extent in shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

void require_rank(const TensorF& t, int rank, const char* who) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(who) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + t.shape_str());
  }
}

} // namespace

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

TensorF::TensorF(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_product(shape_)), 0.0);
}

TensorF::TensorF(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (static_cast<std::int64_t>(data_.size()) != shape_product(shape_)) {
    throw DimensionError("value count " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
  }
}

TensorF TensorF::full(std::vector<int> shape, double value) {
  TensorF t(std::move(shape));
  t.fill(value);
  return t;
}

double& TensorF::at(int i, int j) {
  return data_[static_cast<std::size_t>(i) * shape_[1] + j];
}
double TensorF::at(int i, int j) const {
  return data_[static_cast<std::size_t>(i) * shape_[1] + j];
}
double& TensorF::at(int t, int y, int x, int c) {
  const std::size_t idx =
      ((static_cast<std::size_t>(t) * shape_[1] + y) * shape_[2] + x) * shape_[3] + c;
  return data_[idx];
}
double TensorF::at(int t, int y, int x, int c) const {
  const std::size_t idx =
      ((static_cast<std::size_t>(t) * shape_[1] + y) * shape_[2] + x) * shape_[3] + c;
  return data_[idx];
}

bool TensorF::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void TensorF::fill(double v) {
  for (double& d : data_) d = v;
}

std::string TensorF::shape_str() const { return vistag::shape_str(shape_); }

// ---- elementwise ----

TensorF relu(const TensorF& x) {
  TensorF y(x.shape());
  const double* xp = x.data();
  double* yp = y.data();
  for (std::int64_t i = 0; i < x.size(); ++i) yp[i] = xp[i] > 0.0 ? xp[i] : 0.0;
  return y;
}

TensorF relu_backward(const TensorF& x, const TensorF& dy) {
  if (!x.same_shape(dy)) throw DimensionError("relu_backward: shape mismatch");
  TensorF dx(x.shape());
  const double* xp = x.data();
  const double* gp = dy.data();
  double* dp = dx.data();
  for (std::int64_t i = 0; i < x.size(); ++i) dp[i] = xp[i] > 0.0 ? gp[i] : 0.0;
  return dx;
}

TensorF sigmoid(const TensorF& x) {
  TensorF y(x.shape());
  const double* xp = x.data();
  double* yp = y.data();
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const double v = xp[i];
    yp[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                     : std::exp(v) / (1.0 + std::exp(v));
  }
  return y;
}

TensorF sigmoid_backward(const TensorF& y, const TensorF& dy) {
  if (!y.same_shape(dy)) throw DimensionError("sigmoid_backward: shape mismatch");
  TensorF dx(y.shape());
  const double* yp = y.data();
  const double* gp = dy.data();
  double* dp = dx.data();
  for (std::int64_t i = 0; i < y.size(); ++i) dp[i] = gp[i] * yp[i] * (1.0 - yp[i]);
  return dx;
}

TensorF add(const TensorF& a, const TensorF& b) {
  if (!a.same_shape(b)) throw DimensionError("add: shape mismatch");
  TensorF y(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
  return y;
}

TensorF scale(const TensorF& a, double s) {
  TensorF y(a.shape());
  for (std::int64_t i = 0; i < a.size(); ++i) y[i] = a[i] * s;
  return y;
}

void add_in_place(TensorF& acc, const TensorF& t) {
  if (!acc.same_shape(t)) throw DimensionError("add_in_place: shape mismatch");
  double* ap = acc.data();
  const double* tp = t.data();
  for (std::int64_t i = 0; i < acc.size(); ++i) ap[i] += tp[i];
}

// ---- matrix ops ----

TensorF matmul(const TensorF& a, const TensorF& b) {
  require_rank(a, 2, "matmul(a)");
  require_rank(b, 2, "matmul(b)");
  const int m = a.extent(0), k = a.extent(1);
  const int k2 = b.extent(0), n = b.extent(1);
  if (k != k2) {
    throw DimensionError("matmul: inner extents differ, " + a.shape_str() + " vs " +
                         b.shape_str());
  }
  TensorF c({m, n});
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  // ikj order: per output element the k-sum still runs left to right, and the
  // inner j loop is contiguous in both b and c.
  for (int i = 0; i < m; ++i) {
    double* crow = cp + static_cast<std::size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const double av = ap[static_cast<std::size_t>(i) * k + kk];
      const double* brow = bp + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

void matmul_backward(const TensorF& a, const TensorF& b, const TensorF& dy,
                     TensorF& da, TensorF& db) {
  const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (dy.rank() != 2 || dy.extent(0) != m || dy.extent(1) != n) {
    throw DimensionError("matmul_backward: dy shape " + dy.shape_str());
  }
  da = TensorF({m, k});
  db = TensorF({k, n});
  const double* ap = a.data();
  const double* bp = b.data();
  const double* gp = dy.data();
  // da = dy * b^T
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      double acc = 0.0;
      const double* grow = gp + static_cast<std::size_t>(i) * n;
      const double* brow = bp + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
      da[static_cast<std::size_t>(i) * k + kk] = acc;
    }
  }
  // db = a^T * dy
  double* dbp = db.data();
  for (int i = 0; i < m; ++i) {
    const double* grow = gp + static_cast<std::size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const double av = ap[static_cast<std::size_t>(i) * k + kk];
      double* dbrow = dbp + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) dbrow[j] += av * grow[j];
    }
  }
}

TensorF softmax_rows(const TensorF& a) {
  require_rank(a, 2, "softmax_rows");
  const int m = a.extent(0), n = a.extent(1);
  TensorF y({m, n});
  for (int i = 0; i < m; ++i) {
    const double* row = a.data() + static_cast<std::size_t>(i) * n;
    double* out = y.data() + static_cast<std::size_t>(i) * n;
    double mx = row[0];
    for (int j = 1; j < n; ++j) mx = row[j] > mx ? row[j] : mx;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      out[j] = std::exp(row[j] - mx);
      sum += out[j];
    }
    for (int j = 0; j < n; ++j) out[j] /= sum;
  }
  return y;
}

TensorF softmax_rows_backward(const TensorF& y, const TensorF& dy) {
  if (!y.same_shape(dy)) throw DimensionError("softmax_rows_backward: shape mismatch");
  const int m = y.extent(0), n = y.extent(1);
  TensorF dz({m, n});
  for (int i = 0; i < m; ++i) {
    const double* yr = y.data() + static_cast<std::size_t>(i) * n;
    const double* gr = dy.data() + static_cast<std::size_t>(i) * n;
    double* dr = dz.data() + static_cast<std::size_t>(i) * n;
    double dot = 0.0;
    for (int j = 0; j < n; ++j) dot += yr[j] * gr[j];
    for (int j = 0; j < n; ++j) dr[j] = yr[j] * (gr[j] - dot);
  }
  return dz;
}

// ---- conv3d ----

namespace {

void check_conv_args(const TensorF& x, const TensorF& k, Stride3 stride, Pad3 pad) {
  require_rank(x, 4, "conv3d(x)");
  require_rank(k, 5, "conv3d(k)");
  if (x.extent(3) != k.extent(3)) {
    throw DimensionError("conv3d: input channels " + std::to_string(x.extent(3)) +
                         " vs kernel " + std::to_string(k.extent(3)));
  }
  if (stride.t <= 0 || stride.h <= 0 || stride.w <= 0)
    throw ConfigError("conv3d: stride must be positive");
  if (pad.t < 0 || pad.h < 0 || pad.w < 0)
    throw ConfigError("conv3d: pad must be non-negative");
}

} // namespace

std::vector<int> conv3d_output_shape(const std::vector<int>& x_shape,
                                     const std::vector<int>& k_shape,
                                     Stride3 stride, Pad3 pad) {
  const int nt = x_shape[0] + 2 * pad.t - k_shape[0];
  const int nh = x_shape[1] + 2 * pad.h - k_shape[1];
  const int nw = x_shape[2] + 2 * pad.w - k_shape[2];
  if (nt < 0 || nh < 0 || nw < 0) {
    throw DimensionError("conv3d: kernel " + shape_str(k_shape) +
                         " exceeds padded input " + shape_str(x_shape));
  }
  return {nt / stride.t + 1, nh / stride.h + 1, nw / stride.w + 1, k_shape[4]};
}

TensorF conv3d(const TensorF& x, const TensorF& k, const TensorF& bias,
               Stride3 stride, Pad3 pad) {
  check_conv_args(x, k, stride, pad);
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2), Ci = x.extent(3);
  const int KT = k.extent(0), KH = k.extent(1), KW = k.extent(2), Co = k.extent(4);
  if (bias.size() != 0 && (bias.rank() != 1 || bias.extent(0) != Co))
    throw DimensionError("conv3d: bias shape " + bias.shape_str());

  const std::vector<int> oshape = conv3d_output_shape(x.shape(), k.shape(), stride, pad);
  const int OT = oshape[0], OH = oshape[1], OW = oshape[2];
  TensorF y(oshape);

  const double* xp = x.data();
  const double* kp = k.data();
  double* yp = y.data();
  const std::int64_t xsh = static_cast<std::int64_t>(W) * Ci;
  const std::int64_t xst = static_cast<std::int64_t>(H) * xsh;
  const std::int64_t ksc = Co; // stride of ci within kernel
  for (int ot = 0; ot < OT; ++ot) {
    for (int oh = 0; oh < OH; ++oh) {
      for (int ow = 0; ow < OW; ++ow) {
        double* out = yp + (((static_cast<std::int64_t>(ot) * OH + oh) * OW) + ow) * Co;
        if (bias.size() != 0) {
          for (int co = 0; co < Co; ++co) out[co] = bias[co];
        }
        const int t0 = ot * stride.t - pad.t;
        const int h0 = oh * stride.h - pad.h;
        const int w0 = ow * stride.w - pad.w;
        for (int kt = 0; kt < KT; ++kt) {
          const int ti = t0 + kt;
          if (ti < 0 || ti >= T) continue;
          for (int kh = 0; kh < KH; ++kh) {
            const int hi = h0 + kh;
            if (hi < 0 || hi >= H) continue;
            for (int kw = 0; kw < KW; ++kw) {
              const int wi = w0 + kw;
              if (wi < 0 || wi >= W) continue;
              const double* xv = xp + ti * xst + hi * xsh + static_cast<std::int64_t>(wi) * Ci;
              const double* kv =
                  kp + (((static_cast<std::int64_t>(kt) * KH + kh) * KW + kw) * Ci) * Co;
              for (int ci = 0; ci < Ci; ++ci) {
                const double xval = xv[ci];
                const double* krow = kv + ci * ksc;
                for (int co = 0; co < Co; ++co) out[co] += xval * krow[co];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

ConvGrads conv3d_backward(const TensorF& x, const TensorF& k, const TensorF& dy,
                          Stride3 stride, Pad3 pad) {
  check_conv_args(x, k, stride, pad);
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2), Ci = x.extent(3);
  const int KT = k.extent(0), KH = k.extent(1), KW = k.extent(2), Co = k.extent(4);
  const std::vector<int> oshape = conv3d_output_shape(x.shape(), k.shape(), stride, pad);
  if (dy.shape() != oshape)
    throw DimensionError("conv3d_backward: dy shape " + dy.shape_str() + " expected " +
                         shape_str(oshape));
  const int OT = oshape[0], OH = oshape[1], OW = oshape[2];

  ConvGrads g{TensorF(x.shape()), TensorF(k.shape()), TensorF({Co})};
  const double* xp = x.data();
  const double* kp = k.data();
  const double* gp = dy.data();
  double* dxp = g.dx.data();
  double* dkp = g.dk.data();
  const std::int64_t xsh = static_cast<std::int64_t>(W) * Ci;
  const std::int64_t xst = static_cast<std::int64_t>(H) * xsh;

  for (int ot = 0; ot < OT; ++ot) {
    for (int oh = 0; oh < OH; ++oh) {
      for (int ow = 0; ow < OW; ++ow) {
        const double* gout = gp + (((static_cast<std::int64_t>(ot) * OH + oh) * OW) + ow) * Co;
        for (int co = 0; co < Co; ++co) g.dbias[co] += gout[co];
        const int t0 = ot * stride.t - pad.t;
        const int h0 = oh * stride.h - pad.h;
        const int w0 = ow * stride.w - pad.w;
        for (int kt = 0; kt < KT; ++kt) {
          const int ti = t0 + kt;
          if (ti < 0 || ti >= T) continue;
          for (int kh = 0; kh < KH; ++kh) {
            const int hi = h0 + kh;
            if (hi < 0 || hi >= H) continue;
            for (int kw = 0; kw < KW; ++kw) {
              const int wi = w0 + kw;
              if (wi < 0 || wi >= W) continue;
              const std::int64_t xoff = ti * xst + hi * xsh + static_cast<std::int64_t>(wi) * Ci;
              const std::int64_t koff =
                  (((static_cast<std::int64_t>(kt) * KH + kh) * KW + kw) * Ci) * Co;
              for (int ci = 0; ci < Ci; ++ci) {
                const double xval = xp[xoff + ci];
                const double* krow = kp + koff + static_cast<std::int64_t>(ci) * Co;
                double* dkrow = dkp + koff + static_cast<std::int64_t>(ci) * Co;
                double acc = 0.0;
                for (int co = 0; co < Co; ++co) {
                  const double gv = gout[co];
                  acc += gv * krow[co];
                  dkrow[co] += xval * gv;
                }
                dxp[xoff + ci] += acc;
              }
            }
          }
        }
      }
    }
  }
  return g;
}

// ---- conv_transpose3d ----

TensorF conv_transpose3d(const TensorF& x, const TensorF& k, const TensorF& bias,
                         Stride3 stride, Pad3 pad) {
  check_conv_args(x, k, stride, pad);
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2), Ci = x.extent(3);
  const int KT = k.extent(0), KH = k.extent(1), KW = k.extent(2), Co = k.extent(4);
  const int OT = (T - 1) * stride.t + KT - 2 * pad.t;
  const int OH = (H - 1) * stride.h + KH - 2 * pad.h;
  const int OW = (W - 1) * stride.w + KW - 2 * pad.w;
  if (OT <= 0 || OH <= 0 || OW <= 0)
    throw ConfigError("conv_transpose3d: non-positive output extent");
  if (bias.size() != 0 && (bias.rank() != 1 || bias.extent(0) != Co))
    throw DimensionError("conv_transpose3d: bias shape " + bias.shape_str());

  TensorF y({OT, OH, OW, Co});
  double* yp = y.data();
  if (bias.size() != 0) {
    for (std::int64_t i = 0; i < y.size(); i += Co)
      for (int co = 0; co < Co; ++co) yp[i + co] = bias[co];
  }
  const double* xp = x.data();
  const double* kp = k.data();
  const std::int64_t ysh = static_cast<std::int64_t>(OW) * Co;
  const std::int64_t yst = static_cast<std::int64_t>(OH) * ysh;

  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < H; ++h) {
      for (int w = 0; w < W; ++w) {
        const double* xv =
            xp + ((static_cast<std::int64_t>(t) * H + h) * W + w) * Ci;
        for (int kt = 0; kt < KT; ++kt) {
          const int to = t * stride.t + kt - pad.t;
          if (to < 0 || to >= OT) continue;
          for (int kh = 0; kh < KH; ++kh) {
            const int ho = h * stride.h + kh - pad.h;
            if (ho < 0 || ho >= OH) continue;
            for (int kw = 0; kw < KW; ++kw) {
              const int wo = w * stride.w + kw - pad.w;
              if (wo < 0 || wo >= OW) continue;
              double* out = yp + to * yst + ho * ysh + static_cast<std::int64_t>(wo) * Co;
              const double* kv =
                  kp + (((static_cast<std::int64_t>(kt) * KH + kh) * KW + kw) * Ci) * Co;
              for (int ci = 0; ci < Ci; ++ci) {
                const double xval = xv[ci];
                const double* krow = kv + static_cast<std::int64_t>(ci) * Co;
                for (int co = 0; co < Co; ++co) out[co] += xval * krow[co];
              }
            }
          }
        }
      }
    }
  }
  return y;
}

ConvGrads conv_transpose3d_backward(const TensorF& x, const TensorF& k,
                                    const TensorF& dy, Stride3 stride, Pad3 pad) {
  check_conv_args(x, k, stride, pad);
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2), Ci = x.extent(3);
  const int KT = k.extent(0), KH = k.extent(1), KW = k.extent(2), Co = k.extent(4);
  const int OT = (T - 1) * stride.t + KT - 2 * pad.t;
  const int OH = (H - 1) * stride.h + KH - 2 * pad.h;
  const int OW = (W - 1) * stride.w + KW - 2 * pad.w;
  if (dy.rank() != 4 || dy.extent(0) != OT || dy.extent(1) != OH ||
      dy.extent(2) != OW || dy.extent(3) != Co)
    throw DimensionError("conv_transpose3d_backward: dy shape " + dy.shape_str());

  ConvGrads g{TensorF(x.shape()), TensorF(k.shape()), TensorF({Co})};
  const double* xp = x.data();
  const double* kp = k.data();
  const double* gp = dy.data();
  double* dkp = g.dk.data();
  const std::int64_t ysh = static_cast<std::int64_t>(OW) * Co;
  const std::int64_t yst = static_cast<std::int64_t>(OH) * ysh;

  for (std::int64_t i = 0; i < dy.size(); i += Co)
    for (int co = 0; co < Co; ++co) g.dbias[co] += gp[i + co];

  for (int t = 0; t < T; ++t) {
    for (int h = 0; h < H; ++h) {
      for (int w = 0; w < W; ++w) {
        const std::int64_t xoff = ((static_cast<std::int64_t>(t) * H + h) * W + w) * Ci;
        for (int kt = 0; kt < KT; ++kt) {
          const int to = t * stride.t + kt - pad.t;
          if (to < 0 || to >= OT) continue;
          for (int kh = 0; kh < KH; ++kh) {
            const int ho = h * stride.h + kh - pad.h;
            if (ho < 0 || ho >= OH) continue;
            for (int kw = 0; kw < KW; ++kw) {
              const int wo = w * stride.w + kw - pad.w;
              if (wo < 0 || wo >= OW) continue;
              const double* gout = gp + to * yst + ho * ysh + static_cast<std::int64_t>(wo) * Co;
              const std::int64_t koff =
                  (((static_cast<std::int64_t>(kt) * KH + kh) * KW + kw) * Ci) * Co;
              for (int ci = 0; ci < Ci; ++ci) {
                const double xval = xp[xoff + ci];
                const double* krow = kp + koff + static_cast<std::int64_t>(ci) * Co;
                double* dkrow = dkp + koff + static_cast<std::int64_t>(ci) * Co;
                double acc = 0.0;
                for (int co = 0; co < Co; ++co) {
                  const double gv = gout[co];
                  acc += gv * krow[co];
                  dkrow[co] += xval * gv;
                }
                g.dx[xoff + ci] += acc;
              }
            }
          }
        }
      }
    }
  }
  return g;
}

// ---- pooling / resampling ----

TensorF avg_pool_spatial(const TensorF& x, int fh, int fw) {
  require_rank(x, 4, "avg_pool_spatial");
  if (fh <= 0 || fw <= 0) throw ConfigError("avg_pool_spatial: factors must be positive");
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2), C = x.extent(3);
  if (H % fh != 0 || W % fw != 0)
    throw ConfigError("avg_pool_spatial: " + x.shape_str() + " not divisible by " +
                      std::to_string(fh) + "x" + std::to_string(fw));
  const int OH = H / fh, OW = W / fw;
  TensorF y({T, OH, OW, C});
  const double inv = 1.0 / (static_cast<double>(fh) * fw);
  for (int t = 0; t < T; ++t)
    for (int oh = 0; oh < OH; ++oh)
      for (int ow = 0; ow < OW; ++ow)
        for (int c = 0; c < C; ++c) {
          double acc = 0.0;
          for (int dh = 0; dh < fh; ++dh)
            for (int dw = 0; dw < fw; ++dw)
              acc += x.at(t, oh * fh + dh, ow * fw + dw, c);
          y.at(t, oh, ow, c) = acc * inv;
        }
  return y;
}

TensorF avg_pool_spatial_backward(const TensorF& dy, int fh, int fw) {
  require_rank(dy, 4, "avg_pool_spatial_backward");
  const int T = dy.extent(0), OH = dy.extent(1), OW = dy.extent(2), C = dy.extent(3);
  TensorF dx({T, OH * fh, OW * fw, C});
  const double inv = 1.0 / (static_cast<double>(fh) * fw);
  for (int t = 0; t < T; ++t)
    for (int oh = 0; oh < OH; ++oh)
      for (int ow = 0; ow < OW; ++ow)
        for (int c = 0; c < C; ++c) {
          const double g = dy.at(t, oh, ow, c) * inv;
          for (int dh = 0; dh < fh; ++dh)
            for (int dw = 0; dw < fw; ++dw)
              dx.at(t, oh * fh + dh, ow * fw + dw, c) = g;
        }
  return dx;
}

TensorF upsample_nearest(const TensorF& x, int fh, int fw) {
  require_rank(x, 4, "upsample_nearest");
  if (fh <= 0 || fw <= 0) throw ConfigError("upsample_nearest: factors must be positive");
  const int T = x.extent(0), H = x.extent(1), W = x.extent(2), C = x.extent(3);
  TensorF y({T, H * fh, W * fw, C});
  for (int t = 0; t < T; ++t)
    for (int h = 0; h < H * fh; ++h)
      for (int w = 0; w < W * fw; ++w)
        for (int c = 0; c < C; ++c) y.at(t, h, w, c) = x.at(t, h / fh, w / fw, c);
  return y;
}

// ---- finite differences ----

double finite_diff_at(const std::function<double(const TensorF&)>& f,
                      const TensorF& x, std::int64_t index, double eps) {
  if (eps <= 0.0) throw ContractError("finite_diff: eps must be positive");
  TensorF probe = x;
  probe[index] = x[index] + eps;
  const double fp = f(probe);
  probe[index] = x[index] - eps;
  const double fm = f(probe);
  if (!std::isfinite(fp) || !std::isfinite(fm))
    throw NumericError("finite_diff: non-finite function value");
  return (fp - fm) / (2.0 * eps);
}

TensorF finite_diff_grad(const std::function<double(const TensorF&)>& f,
                         const TensorF& x, double eps) {
  TensorF g(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) g[i] = finite_diff_at(f, x, i, eps);
  return g;
}

} // namespace vistag
