#include "cdcnet/nets/layers.hpp"

namespace cdcnet {

template <class T>
BatchNorm<T>::BatchNorm(std::string name, std::size_t channels)
    : name_(std::move(name)),
      scale_{name_ + ".scale", Tensor<T>(Shape{1, channels, 1, 1}, T(1)), true},
      shift_{name_ + ".shift", Tensor<T>(Shape{1, channels, 1, 1}, T(0)), true},
      state_(channels) {}

template <class T>
Var<T> BatchNorm<T>::forward(Tape<T>& tape, Var<T> input, Mode mode) {
  return batchnorm(input, tape.watch(scale_), tape.watch(shift_), state_, mode);
}

template <class T>
void BatchNorm<T>::collect(StateDict<T>& out) {
  out.params.push_back(&scale_);
  out.params.push_back(&shift_);
  out.buffers.emplace_back(name_ + ".running_mean", &state_.running_mean);
  out.buffers.emplace_back(name_ + ".running_var", &state_.running_var);
}

template <class T>
CdcUnit<T>::CdcUnit(const std::string& name, std::size_t in, std::size_t out, ThetaMode mode, bool bn_relu)
    : conv_(name + ".conv", in, out, mode) {
  if (bn_relu) bn_ = std::make_unique<BatchNorm<T>>(name + ".bn", out);
}

template <class T>
Var<T> CdcUnit<T>::forward(Tape<T>& tape, Var<T> input, Mode mode) {
  Var<T> y = conv_.forward(tape, input);
  if (!bn_) return y;
  return relu(bn_->forward(tape, y, mode));
}

template <class T>
void CdcUnit<T>::collect(StateDict<T>& out) {
  conv_.collect(out);
  if (bn_) bn_->collect(out);
}

template <class T>
Var<T> multi_level_fuse(Var<T> low, Var<T> mid, Var<T> high) {
  const Shape a = low.shape(), b = mid.shape(), c = high.shape();
  if (a.h != b.h || a.h != c.h || a.w != b.w || a.w != c.w) {
    throw ShapeError("multi-level fuse: spatial mismatch (" + a.str() + ", " + b.str() + ", " + c.str() + ")");
  }
  return concat_channels<T>({low, mid, high});
}

template <class T>
Mafm<T>::Mafm(const std::string& name, std::array<std::size_t, 3> kernels) {
  static const char* levels[] = {"low", "mid", "high"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (kernels[i] == 0 || kernels[i] % 2 == 0) throw ConfigError("mafm: kernel sizes must be odd");
    weights_.push_back(
        {name + "." + levels[i] + ".weight", Tensor<T>(Shape{1, 2, kernels[i], kernels[i]}), true});
  }
}

template <class T>
void Mafm<T>::init(Rng& rng) {
  for (auto& w : weights_) kaiming_uniform(w.value, rng);
}

template <class T>
Var<T> Mafm<T>::attention(Tape<T>& tape, std::size_t level, Var<T> features) {
  Parameter<T>& w = weights_.at(level);
  const std::size_t k = w.value.shape().h;
  Var<T> pooled = concat_channels<T>({channel_avg(features), channel_max(features)});
  return sigmoid(conv2d(pooled, tape.watch(w), ConvGeometry{k, 1, k / 2}));
}

template <class T>
Var<T> Mafm<T>::forward(Tape<T>& tape, Var<T> low, Var<T> mid, Var<T> high) {
  Var<T> levels[] = {low, mid, high};
  for (std::size_t i = 0; i < 3; ++i) levels[i] = hadamard(levels[i], attention(tape, i, levels[i]));
  return multi_level_fuse(levels[0], levels[1], levels[2]);
}

template <class T>
void Mafm<T>::collect(StateDict<T>& out) {
  for (auto& w : weights_) out.params.push_back(&w);
}

template class BatchNorm<float>;
template class BatchNorm<double>;
template class CdcUnit<float>;
template class CdcUnit<double>;
template class Mafm<float>;
template class Mafm<double>;
template Var<float> multi_level_fuse(Var<float>, Var<float>, Var<float>);
template Var<double> multi_level_fuse(Var<double>, Var<double>, Var<double>);

}  // namespace cdcnet
