#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace vistag {

/// Dense row-major N-d real array. Axis order is T,H,W,C throughout the
/// project. Values are double; reductions accumulate left-to-right so results
/// are bit-reproducible.
class TensorF {
public:
  TensorF() = default;
  explicit TensorF(std::vector<int> shape);
  TensorF(std::vector<int> shape, std::vector<double> values);

  static TensorF full(std::vector<int> shape, double value);

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

  // Rank-specific accessors; callers are expected to know the rank.
  double& at(int i, int j);
  double at(int i, int j) const;
  double& at(int t, int y, int x, int c);
  double at(int t, int y, int x, int c) const;

  bool same_shape(const TensorF& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  void fill(double v);

  std::string shape_str() const;

private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

struct Stride3 {
  int t = 1, h = 1, w = 1;
};
struct Pad3 {
  int t = 0, h = 0, w = 0;
};

std::string shape_str(const std::vector<int>& shape);

// ---- elementwise ----

TensorF relu(const TensorF& x);
TensorF relu_backward(const TensorF& x, const TensorF& dy);
TensorF sigmoid(const TensorF& x);
/// d/dx from the forward *output* y = sigmoid(x).
TensorF sigmoid_backward(const TensorF& y, const TensorF& dy);
TensorF add(const TensorF& a, const TensorF& b);
TensorF scale(const TensorF& a, double s);
void add_in_place(TensorF& acc, const TensorF& t);

// ---- matrix ops ----

TensorF matmul(const TensorF& a, const TensorF& b);
void matmul_backward(const TensorF& a, const TensorF& b, const TensorF& dy,
                     TensorF& da, TensorF& db);

/// Row-wise softmax with max-subtraction; rows sum to 1.
TensorF softmax_rows(const TensorF& a);
TensorF softmax_rows_backward(const TensorF& y, const TensorF& dy);

// ---- 3D convolution family (x: T×H×W×Cin, k: kt×kh×kw×Cin×Cout) ----

std::vector<int> conv3d_output_shape(const std::vector<int>& x_shape,
                                     const std::vector<int>& k_shape,
                                     Stride3 stride, Pad3 pad);

TensorF conv3d(const TensorF& x, const TensorF& k, const TensorF& bias,
               Stride3 stride, Pad3 pad);

struct ConvGrads {
  TensorF dx, dk, dbias;
};

ConvGrads conv3d_backward(const TensorF& x, const TensorF& k, const TensorF& dy,
                          Stride3 stride, Pad3 pad);

/// Transposed convolution; output extent per axis is (n-1)*s + k - 2p.
TensorF conv_transpose3d(const TensorF& x, const TensorF& k, const TensorF& bias,
                         Stride3 stride, Pad3 pad);

ConvGrads conv_transpose3d_backward(const TensorF& x, const TensorF& k,
                                    const TensorF& dy, Stride3 stride, Pad3 pad);

// ---- pooling / resampling (x: T×H×W×C) ----

TensorF avg_pool_spatial(const TensorF& x, int fh, int fw);
TensorF avg_pool_spatial_backward(const TensorF& dy, int fh, int fw);
TensorF upsample_nearest(const TensorF& x, int fh, int fw);

// ---- finite differences ----

/// Central difference (f(x+eps*e_i) - f(x-eps*e_i)) / (2 eps) per element.
TensorF finite_diff_grad(const std::function<double(const TensorF&)>& f,
                         const TensorF& x, double eps);

/// Single-coordinate central difference.
double finite_diff_at(const std::function<double(const TensorF&)>& f,
                      const TensorF& x, std::int64_t index, double eps);

} // namespace vistag
