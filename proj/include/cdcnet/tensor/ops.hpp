#pragma once

#include <cstddef>
#include <optional>
#include <type_traits>
#include <vector>

#include "cdcnet/tensor/tape.hpp"

namespace cdcnet {

/// Square-kernel convolution geometry. Padding is zero-fill.
struct ConvGeometry {
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
};

/// Output extent floor((in + 2*padding - kernel)/stride) + 1; throws ShapeError
/// when it would be non-positive.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride, long padding);

template <class T>
struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  ConvGeometry geometry{};
  Tensor<T> weights;               // [O, I, k, k]
  std::optional<Tensor<T>> bias;   // [1, O, 1, 1]
};

// ---------------------------------------------------------------------------
// Tensor-level kernels (no tape).

/// y(p0) = sum_{pn} w(pn) x(p0 + pn) (+ bias). `padding` may be negative, in
/// which case the input is cropped instead of padded.
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::size_t stride, long padding,
                         const Tensor<T>* bias = nullptr);

template <class T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvSpec<T>& spec);

// ---------------------------------------------------------------------------
// Tape-recorded operations.

template <class T>
Var<T> conv2d(Var<T> input, Var<T> weights, const ConvGeometry& geometry,
              std::optional<std::type_identity_t<Var<T>>> bias = std::nullopt);

/// Convolution with signed padding; used by the CDC centre term.
template <class T>
Var<T> conv2d_signed(Var<T> input, Var<T> weights, std::size_t stride, long padding);

enum class Mode { train, infer };

template <class T>
struct BatchNormState {
  Tensor<T> running_mean;  // [1,C,1,1]
  Tensor<T> running_var;   // [1,C,1,1], strictly positive
  double epsilon = 1e-5;
  double momentum = 0.1;

  explicit BatchNormState(std::size_t channels = 0)
      : running_mean(Shape{1, channels, 1, 1}, T(0)), running_var(Shape{1, channels, 1, 1}, T(1)) {}
};

/// Training mode normalises by batch statistics (biased variance) and
/// updates running stats by momentum (unbiased variance); inference mode is
/// the affine map given by the running stats.
template <class T>
Var<T> batchnorm(Var<T> input, Var<T> scale, Var<T> shift, BatchNormState<T>& state, Mode mode);

template <class T>
Var<T> relu(Var<T> x);
template <class T>
Var<T> sigmoid(Var<T> x);
template <class T>
Var<T> add(Var<T> a, Var<T> b);
template <class T>
Var<T> sub(Var<T> a, Var<T> b);
/// Elementwise product; `b` may have a single channel, broadcast across C.
template <class T>
Var<T> hadamard(Var<T> a, Var<T> b);
template <class T>
Var<T> scale(Var<T> x, T factor);
/// x multiplied by a [1,1,1,1] value.
template <class T>
Var<T> scale_by(Var<T> x, Var<T> factor);
/// Sum of same-shape values in list order.
template <class T>
Var<T> add_n(const std::vector<Var<T>>& xs);

template <class T>
Var<T> concat_channels(const std::vector<Var<T>>& xs);
template <class T>
std::vector<Var<T>> split_channels(Var<T> x, const std::vector<std::size_t>& sizes);

/// Max pooling; padded cells never win. Ties go to the first index in scan order.
template <class T>
Var<T> max_pool2d(Var<T> x, std::size_t kernel, std::size_t stride, std::size_t padding);
template <class T>
Var<T> maxpool2x2(Var<T> x) {
  return max_pool2d(x, 2, 2, 0);
}

/// Mean / max across channels: [N,C,H,W] -> [N,1,H,W].
template <class T>
Var<T> channel_avg(Var<T> x);
template <class T>
Var<T> channel_max(Var<T> x);

template <class T>
Var<T> sum_all(Var<T> x);
template <class T>
Var<T> mean_all(Var<T> x);

/// Softmax over every element of x (shape preserved).
template <class T>
Var<T> softmax(Var<T> x);
/// Element i of x as a [1,1,1,1] value.
template <class T>
Var<T> element(Var<T> x, std::size_t index);

}  // namespace cdcnet
