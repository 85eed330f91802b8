#pragma once

#include <string>
#include <variant>

#include "cdcnet/tensor/ops.hpp"
#include "cdcnet/tensor/state.hpp"

namespace cdcnet {

/// Default operating point for every CDC layer.
inline constexpr double kDefaultTheta = 0.7;

/// theta held constant, must lie in [0, 1].
struct FixedTheta {
  double theta = kDefaultTheta;
};

/// theta = sigmoid(pre_theta) with pre_theta learned per layer.
struct AdaptiveTheta {
  double initial_pre_theta = 0.0;
};

using ThetaMode = std::variant<FixedTheta, AdaptiveTheta>;

std::string describe(const ThetaMode& mode);

// Central difference convolution:
//
//   y(p0) = theta * sum_n w(pn) (x(p0+pn) - x(p0)) + (1-theta) * sum_n w(pn) x(p0+pn)
//         = sum_n w(pn) x(p0+pn) - theta * x(p0) * sum_n w(pn)
//
// Padded samples are zero in the intensity term and contribute (0 - x(p0)) in
// the difference term, which is the convention under which both forms agree
// at the border.

/// Reference evaluation of the difference/intensity blend, one output at a time.
template <class T>
Tensor<T> cdc_forward_direct(const Tensor<T>& input, const Tensor<T>& weights, const ConvGeometry& geometry,
                             T theta);

/// Vanilla convolution minus theta times a 1x1 convolution with the
/// spatially summed kernel, sampled at each window centre.
template <class T>
Tensor<T> cdc_forward_decomposed(const Tensor<T>& input, const Tensor<T>& weights, const ConvGeometry& geometry,
                                 T theta);

/// kernel_diff[o,i] = sum over the k x k window of w[o,i], shape [O,I,1,1].
template <class T>
Tensor<T> kernel_difference(const Tensor<T>& weights);
template <class T>
Var<T> kernel_difference(Var<T> weights);

/// sigmoid(pre_theta), clamped below 1 so the result stays in (0,1).
template <class T>
T adaptive_theta_value(T pre_theta);
template <class T>
Var<T> adaptive_theta(Var<T> pre_theta);

/// Tape-recorded decomposed CDC with a constant theta. theta == 0 records a
/// plain conv2d.
template <class T>
Var<T> cdc_conv(Var<T> input, Var<T> weights, const ConvGeometry& geometry, T theta);

/// Tape-recorded decomposed CDC with theta supplied as a [1,1,1,1] value.
template <class T>
Var<T> cdc_conv(Var<T> input, Var<T> weights, const ConvGeometry& geometry, Var<T> theta);

/// Convolution weights plus the theta setting. No bias: every CDC in the
/// networks is followed by batch norm.
template <class T>
class CdcLayer {
 public:
  CdcLayer(std::string name, std::size_t in_channels, std::size_t out_channels, ThetaMode mode,
           ConvGeometry geometry = {3, 1, 1});

  CdcLayer(const CdcLayer&) = delete;
  CdcLayer& operator=(const CdcLayer&) = delete;
  CdcLayer(CdcLayer&&) = default;
  CdcLayer& operator=(CdcLayer&&) = default;

  void init(Rng& rng) { kaiming_uniform(weight_.value, rng); }

  Var<T> forward(Tape<T>& tape, Var<T> input);
  Tensor<T> forward_direct(const Tensor<T>& input) const;
  Tensor<T> forward_decomposed(const Tensor<T>& input) const;

  /// Effective theta in [0,1].
  T theta() const;
  bool adaptive() const { return std::holds_alternative<AdaptiveTheta>(mode_); }
  const ThetaMode& mode() const { return mode_; }
  const ConvGeometry& geometry() const { return geometry_; }
  std::size_t in_channels() const { return weight_.value.shape().c; }
  std::size_t out_channels() const { return weight_.value.shape().n; }

  Parameter<T>& weight() { return weight_; }
  const Parameter<T>& weight() const { return weight_; }
  /// Only meaningful in adaptive mode.
  Parameter<T>& pre_theta() { return pre_theta_; }
  const Parameter<T>& pre_theta() const { return pre_theta_; }

  void collect(StateDict<T>& out);

 private:
  ConvGeometry geometry_;
  ThetaMode mode_;
  Parameter<T> weight_;
  Parameter<T> pre_theta_;
  Tensor<T> theta_buffer_;
  std::string name_;
};

extern template class CdcLayer<float>;
extern template class CdcLayer<double>;

}  // namespace cdcnet
