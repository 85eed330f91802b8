#include "cdcnet/nas/adam.hpp"

#include <cmath>

namespace cdcnet {

template <class T>
void adam_update(Tensor<T>& param, const Tensor<T>& grad, AdamMoments<T>& s, const AdamConfig& c) {
  require_same_shape(grad.shape(), param.shape(), "adam gradient");
  if (s.m.numel() == 0) {
    s.m = Tensor<T>(param.shape());
    s.v = Tensor<T>(param.shape());
  }
  require_same_shape(s.m.shape(), param.shape(), "adam state");
  ++s.steps;
  const double t = static_cast<double>(s.steps);
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  const T corr1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
  const T corr2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
  const T lr = static_cast<T>(c.lr), wd = static_cast<T>(c.weight_decay), eps = static_cast<T>(c.epsilon);
  for (std::size_t i = 0; i < param.numel(); ++i) {
    const T g = grad[i] + wd * param[i];
    s.m[i] = b1 * s.m[i] + (T(1) - b1) * g;
    s.v[i] = b2 * s.v[i] + (T(1) - b2) * g * g;
    const T mhat = s.m[i] / corr1;
    const T vhat = s.v[i] / corr2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <class T>
Adam<T>::Adam(std::vector<Parameter<T>*> params, AdamConfig config)
    : params_(std::move(params)), state_(params_.size()), config_(config) {}

template <class T>
void Adam<T>::step(const Gradients<T>& grads) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter<T>& p = *params_[i];
    if (!p.trainable || !grads.has(p)) continue;
    adam_update(p.value, grads.of(p), state_[i], config_);
  }
}

template void adam_update(Tensor<float>&, const Tensor<float>&, AdamMoments<float>&, const AdamConfig&);
template void adam_update(Tensor<double>&, const Tensor<double>&, AdamMoments<double>&, const AdamConfig&);
template class Adam<float>;
template class Adam<double>;

}  // namespace cdcnet
