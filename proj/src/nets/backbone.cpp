#include "cdcnet/nets/backbone.hpp"

#include <cmath>

namespace cdcnet {

std::array<std::size_t, 7> BackboneConfig::plan() const {
  std::array<std::size_t, 7> out{};
  const double f = channel_scale * width_multiplier;
  for (std::size_t i = 0; i < 6; ++i) out[i] = scaled_channels(base_plan[i], f, "backbone: channel scaling");
  out[6] = base_plan[6];
  return out;
}

void BackboneConfig::validate() const {
  if (input_size < 8 || input_size % 8 != 0) {
    throw ConfigError("backbone: input_size must be a positive multiple of 8, got " + std::to_string(input_size));
  }
  if (!(channel_scale > 0) || !(width_multiplier > 0) || !std::isfinite(channel_scale * width_multiplier)) {
    throw ConfigError("backbone: channel_scale and width_multiplier must be positive");
  }
  if (nodes == 0) throw ConfigError("backbone: cells need at least one intermediate node");
  if (base_plan[6] != 1) throw ConfigError("backbone: the plan must end in one output channel");
  const auto p = plan();
  if (p[2] != p[3] || p[2] != p[4]) throw ConfigError("backbone: the three cells must share one channel width");
}

template <class T>
Backbone<T>::Backbone(const BackboneConfig& config, const CellFactory& make_cell) : config_(config) {
  config_.validate();
  const auto c = config_.plan();
  const ThetaMode& mode = config_.theta_mode;
  front_.push_back(std::make_unique<CdcUnit<T>>("stem", 3, c[0], mode));
  front_.push_back(std::make_unique<CdcUnit<T>>("pre", c[0], c[1], mode));
  front_.push_back(std::make_unique<CdcUnit<T>>("entry", c[1], c[2], mode));
  for (std::size_t k = 0; k < 3; ++k) cells_[k] = make_cell(k, c[2]);
  if (config_.use_mafm) mafm_ = std::make_unique<Mafm<T>>("mafm");
  head_.push_back(std::make_unique<CdcUnit<T>>("head.0", 3 * c[2], c[5], mode));
  head_.push_back(std::make_unique<CdcUnit<T>>("head.1", c[5], c[6], mode, false));
}

template <class T>
Var<T> Backbone<T>::forward(Tape<T>& tape, Var<T> images, Mode mode) {
  const Shape in = images.shape();
  if (in.c != 3 || in.h != config_.input_size || in.w != config_.input_size) {
    throw ShapeError("backbone: expected input [N,3," + std::to_string(config_.input_size) + "," +
                     std::to_string(config_.input_size) + "], got " + in.str());
  }
  Var<T> x = images;
  for (auto& unit : front_) x = unit->forward(tape, x, mode);
  Var<T> taps[3];
  for (std::size_t k = 0; k < 3; ++k) {
    x = block_pool(cells_[k]->forward(tape, x, mode));
    taps[k] = x;
  }
  const std::size_t d = config_.input_size / 8;
  for (auto& t : taps) t = resample_to(t, d);
  x = mafm_ ? mafm_->forward(tape, taps[0], taps[1], taps[2]) : multi_level_fuse(taps[0], taps[1], taps[2]);
  for (auto& unit : head_) x = unit->forward(tape, x, mode);
  return x;
}

template <class T>
void Backbone<T>::collect(StateDict<T>& out) {
  for (auto& unit : front_) unit->collect(out);
  for (auto& cell : cells_) cell->collect(out);
  if (mafm_) mafm_->collect(out);
  for (auto& unit : head_) unit->collect(out);
}

template <class T>
void Backbone<T>::init(Rng& rng) {
  for (auto& unit : front_) unit->init(rng);
  for (auto& cell : cells_) cell->init(rng);
  if (mafm_) mafm_->init(rng);
  for (auto& unit : head_) unit->init(rng);
}

template class Backbone<float>;
template class Backbone<double>;

}  // namespace cdcnet
