#pragma once

#include <array>
#include <functional>
#include <memory>

#include "cdcnet/nets/cdcn.hpp"

namespace cdcnet {

/// Shared layout of the search supernet and CDCN++.
///
/// With plan c = {c0..c6} = base_plan * channel_scale * width_multiplier:
///   stem CDC 3->c0, pre CDC c0->c1, entry CDC c1->c2,
///   cell1 -> pool -> cell2 -> pool -> cell3 -> pool   (cells run at c2)
///   pooled cell outputs resampled to S/8 and fused (MAFM or concat),
///   head CDC 3*c2->c5 with BN-ReLU, then linear CDC c5->1.
struct BackboneConfig {
  std::size_t input_size = 256;
  double channel_scale = 1.0;
  double width_multiplier = 1.0;
  ThetaMode theta_mode = FixedTheta{};
  bool use_mafm = true;
  std::size_t nodes = 4;
  std::array<std::size_t, 7> base_plan{32, 64, 128, 128, 128, 64, 1};

  std::array<std::size_t, 7> plan() const;
  std::size_t cell_channels() const { return plan()[2]; }
  void validate() const;
};

template <class T>
class CellModule {
 public:
  virtual ~CellModule() = default;
  virtual Var<T> forward(Tape<T>& tape, Var<T> x, Mode mode) = 0;
  virtual void collect(StateDict<T>& out) = 0;
  virtual void init(Rng& rng) = 0;
};

template <class T>
class Backbone : public DepthModel<T> {
 public:
  using CellFactory = std::function<std::unique_ptr<CellModule<T>>(std::size_t index, std::size_t channels)>;

  Var<T> forward(Tape<T>& tape, Var<T> images, Mode mode) override;
  void collect(StateDict<T>& out) override;
  void init(Rng& rng) override;
  std::size_t input_size() const override { return config_.input_size; }

  const BackboneConfig& backbone_config() const { return config_; }
  CellModule<T>& cell(std::size_t k) { return *cells_.at(k); }

 protected:
  Backbone(const BackboneConfig& config, const CellFactory& make_cell);

 private:
  BackboneConfig config_;
  std::vector<std::unique_ptr<CdcUnit<T>>> front_;
  std::array<std::unique_ptr<CellModule<T>>, 3> cells_;
  std::unique_ptr<Mafm<T>> mafm_;
  std::vector<std::unique_ptr<CdcUnit<T>>> head_;
};

extern template class Backbone<float>;
extern template class Backbone<double>;

}  // namespace cdcnet
