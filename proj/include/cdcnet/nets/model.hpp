#pragma once

#include <string>
#include <vector>

#include "cdcnet/tensor/ops.hpp"
#include "cdcnet/tensor/state.hpp"

namespace cdcnet {

/// A network mapping [N,3,S,S] images to [N,1,S/8,S/8] depth maps.
template <class T>
class DepthModel {
 public:
  virtual ~DepthModel() = default;

  virtual Var<T> forward(Tape<T>& tape, Var<T> images, Mode mode) = 0;
  virtual void collect(StateDict<T>& out) = 0;
  virtual void init(Rng& rng) = 0;
  virtual std::size_t input_size() const = 0;

  std::size_t depth_size() const { return input_size() / 8; }
  StateDict<T> state() {
    StateDict<T> s;
    collect(s);
    return s;
  }
  /// Inference-mode forward without gradient recording.
  Tensor<T> predict(const Tensor<T>& images);
};

/// Per-sample mean of a [N,1,D,D] depth prediction; higher means more live.
template <class T>
std::vector<double> depth_scores(const Tensor<T>& depth);

/// Score of a single [1,3,S,S] image.
template <class T>
double infer_score(DepthModel<T>& model, const Tensor<T>& image);

/// Scaled channel count, rounded to nearest; throws ConfigError if it reaches 0.
std::size_t scaled_channels(std::size_t base, double factor, const char* what);

extern template class DepthModel<float>;
extern template class DepthModel<double>;

}  // namespace cdcnet
