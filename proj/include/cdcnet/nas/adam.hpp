#pragma once

#include <unordered_map>
#include <vector>

#include "cdcnet/tensor/tape.hpp"

namespace cdcnet {

struct AdamConfig {
  double lr = 1e-4;
  double weight_decay = 0.0;  // L2 term added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class T>
struct AdamMoments {
  Tensor<T> m, v;
  std::size_t steps = 0;
};

/// One bias-corrected Adam step on a single tensor.
template <class T>
void adam_update(Tensor<T>& param, const Tensor<T>& grad, AdamMoments<T>& state, const AdamConfig& config);

template <class T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, AdamConfig config);

  /// Updates every trainable parameter present in `grads`; the rest stay put.
  void step(const Gradients<T>& grads);
  AdamConfig& config() { return config_; }
  const std::vector<Parameter<T>*>& params() const { return params_; }

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<AdamMoments<T>> state_;
  AdamConfig config_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace cdcnet
