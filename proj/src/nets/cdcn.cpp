#include "cdcnet/nets/cdcn.hpp"

#include <cmath>

namespace cdcnet {

CdcnConfig CdcnConfig::desk() {
  CdcnConfig c;
  c.input_size = 64;
  c.channel_scale = 0.25;
  return c;
}

void CdcnConfig::validate() const {
  if (input_size < 8 || input_size % 8 != 0) {
    throw ConfigError("cdcn: input_size must be a positive multiple of 8, got " + std::to_string(input_size));
  }
  if (!(channel_scale > 0.0) || !std::isfinite(channel_scale)) {
    throw ConfigError("cdcn: channel_scale must be positive");
  }
  scaled_channels(64, channel_scale, "cdcn: channel_scale");
}

template <class T>
Var<T> resample_to(Var<T> x, std::size_t extent) {
  while (x.shape().h > extent) x = maxpool2x2(x);
  if (x.shape().h != extent) {
    throw ShapeError("resample: cannot bring extent " + std::to_string(x.shape().h) + " to " + std::to_string(extent));
  }
  return x;
}

template <class T>
Cdcn<T>::Cdcn(const CdcnConfig& config) : config_(config) {
  config_.validate();
  const double s = config_.channel_scale;
  auto ch = [s](std::size_t base) { return scaled_channels(base, s, "cdcn: channel_scale"); };
  const ThetaMode& mode = config_.theta_mode;

  stem_ = std::make_unique<CdcUnit<T>>("stem", 3, ch(64), mode);
  const std::size_t plan[] = {ch(128), ch(196), ch(128)};
  std::size_t in = ch(64);
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t l = 0; l < 3; ++l) {
      const std::string name = "block" + std::to_string(b + 1) + "." + std::to_string(l);
      blocks_[b].push_back(std::make_unique<CdcUnit<T>>(name, in, plan[l], mode));
      in = plan[l];
    }
  }
  head_.push_back(std::make_unique<CdcUnit<T>>("head.0", 3 * ch(128), ch(128), mode));
  head_.push_back(std::make_unique<CdcUnit<T>>("head.1", ch(128), ch(64), mode));
  head_.push_back(std::make_unique<CdcUnit<T>>("head.2", ch(64), 1, mode, false));
  if (config_.use_mafm) mafm_ = std::make_unique<Mafm<T>>("mafm");
}

template <class T>
Var<T> Cdcn<T>::forward(Tape<T>& tape, Var<T> images, Mode mode) {
  const Shape in = images.shape();
  if (in.c != 3 || in.h != config_.input_size || in.w != config_.input_size) {
    throw ShapeError("cdcn: expected input [N,3," + std::to_string(config_.input_size) + "," +
                     std::to_string(config_.input_size) + "], got " + in.str());
  }
  Var<T> x = stem_->forward(tape, images, mode);
  Var<T> taps[3];
  for (std::size_t b = 0; b < 3; ++b) {
    for (auto& unit : blocks_[b]) x = unit->forward(tape, x, mode);
    x = block_pool(x);
    taps[b] = x;
  }
  const std::size_t d = config_.input_size / 8;
  for (auto& t : taps) t = resample_to(t, d);
  x = mafm_ ? mafm_->forward(tape, taps[0], taps[1], taps[2]) : multi_level_fuse(taps[0], taps[1], taps[2]);
  for (auto& unit : head_) x = unit->forward(tape, x, mode);
  return x;
}

template <class T>
void Cdcn<T>::collect(StateDict<T>& out) {
  stem_->collect(out);
  for (auto& block : blocks_)
    for (auto& unit : block) unit->collect(out);
  if (mafm_) mafm_->collect(out);
  for (auto& unit : head_) unit->collect(out);
}

template <class T>
void Cdcn<T>::init(Rng& rng) {
  stem_->init(rng);
  for (auto& block : blocks_)
    for (auto& unit : block) unit->init(rng);
  if (mafm_) mafm_->init(rng);
  for (auto& unit : head_) unit->init(rng);
}

template <class T>
std::size_t Cdcn<T>::conv_parameter_count() const {
  std::size_t total = stem_->conv().weight().value.numel();
  for (const auto& block : blocks_)
    for (const auto& unit : block) total += unit->conv().weight().value.numel();
  for (const auto& unit : head_) total += unit->conv().weight().value.numel();
  return total;
}

template class Cdcn<float>;
template class Cdcn<double>;
template Var<float> resample_to(Var<float>, std::size_t);
template Var<double> resample_to(Var<double>, std::size_t);

}  // namespace cdcnet
