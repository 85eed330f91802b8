#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "cdcnet/cdc/cdc.hpp"

namespace cdcnet {

/// Batch norm with learnable scale/shift and running statistics.
template <class T>
class BatchNorm {
 public:
  BatchNorm(std::string name, std::size_t channels);

  Var<T> forward(Tape<T>& tape, Var<T> input, Mode mode);
  void collect(StateDict<T>& out);
  std::size_t channels() const { return scale_.value.numel(); }

  Parameter<T>& scale() { return scale_; }
  Parameter<T>& shift() { return shift_; }
  BatchNormState<T>& state() { return state_; }

 private:
  std::string name_;
  Parameter<T> scale_;
  Parameter<T> shift_;
  BatchNormState<T> state_;
};

/// CDC 3x3, optionally followed by BN and ReLU.
template <class T>
class CdcUnit {
 public:
  CdcUnit(const std::string& name, std::size_t in, std::size_t out, ThetaMode mode, bool bn_relu = true);

  Var<T> forward(Tape<T>& tape, Var<T> input, Mode mode);
  void init(Rng& rng) { conv_.init(rng); }
  void collect(StateDict<T>& out);

  CdcLayer<T>& conv() { return conv_; }
  std::size_t out_channels() const { return conv_.out_channels(); }

 private:
  CdcLayer<T> conv_;
  std::unique_ptr<BatchNorm<T>> bn_;
};

/// Channel concatenation of three equally sized feature maps.
template <class T>
Var<T> multi_level_fuse(Var<T> low, Var<T> mid, Var<T> high);

inline constexpr std::array<std::size_t, 3> kMafmKernels{7, 5, 3};

/// F' = F * sigmoid(conv([avg_c(F), max_c(F)])) per level, then concatenated.
/// The attention convs are vanilla, not CDC.
template <class T>
class Mafm {
 public:
  explicit Mafm(const std::string& name, std::array<std::size_t, 3> kernels = kMafmKernels);

  Var<T> forward(Tape<T>& tape, Var<T> low, Var<T> mid, Var<T> high);
  /// Attention map in (0,1) for one level, shape [N,1,H,W].
  Var<T> attention(Tape<T>& tape, std::size_t level, Var<T> features);
  void init(Rng& rng);
  void collect(StateDict<T>& out);

  Parameter<T>& weight(std::size_t level) { return weights_.at(level); }

 private:
  std::vector<Parameter<T>> weights_;
};

extern template class BatchNorm<float>;
extern template class BatchNorm<double>;
extern template class CdcUnit<float>;
extern template class CdcUnit<double>;
extern template class Mafm<float>;
extern template class Mafm<double>;

}  // namespace cdcnet
