#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "cdcnet/nets/layers.hpp"
#include "cdcnet/nets/model.hpp"

namespace cdcnet {

struct CdcnConfig {
  std::size_t input_size = 256;
  double channel_scale = 1.0;
  ThetaMode theta_mode = FixedTheta{};
  bool use_mafm = false;

  /// Desk preset: 64x64 input, quarter width, 8x8 depth output.
  static CdcnConfig desk();
  void validate() const;
};

/// Stem CDC 64, three blocks of CDC [128,196,128] each ending in a stride-2
/// max-pool, the three block outputs pooled down to S/8 and concatenated,
/// then a CDC head [128,64,1] whose last layer is linear.
template <class T>
class Cdcn final : public DepthModel<T> {
 public:
  explicit Cdcn(const CdcnConfig& config);

  Var<T> forward(Tape<T>& tape, Var<T> images, Mode mode) override;
  void collect(StateDict<T>& out) override;
  void init(Rng& rng) override;
  std::size_t input_size() const override { return config_.input_size; }

  const CdcnConfig& config() const { return config_; }
  /// Sum of CDC weight sizes (no BN affine terms).
  std::size_t conv_parameter_count() const;

 private:
  CdcnConfig config_;
  std::unique_ptr<CdcUnit<T>> stem_;
  std::vector<std::unique_ptr<CdcUnit<T>>> blocks_[3];
  std::vector<std::unique_ptr<CdcUnit<T>>> head_;
  std::unique_ptr<Mafm<T>> mafm_;
};

/// 3x3 stride-2 padding-1 pool closing each block or cell.
template <class T>
Var<T> block_pool(Var<T> x) {
  return max_pool2d(x, 3, 2, 1);
}

/// Repeated 2x2 pools bringing a tap down to the target extent.
template <class T>
Var<T> resample_to(Var<T> x, std::size_t extent);

extern template class Cdcn<float>;
extern template class Cdcn<double>;

}  // namespace cdcnet
