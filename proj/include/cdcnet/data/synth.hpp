#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cdcnet/tensor/tensor.hpp"

namespace cdcnet {

enum class AttackType { print_lattice, replay_moire };

std::string attack_name(AttackType t);
AttackType parse_attack(const std::string& name);

/// Capture conditions applied after rendering: x' = clamp(gain_c * x + b +
/// N(0, s^2), 0, 1), with b and s drawn per sample from
/// brightness +- brightness_spread and noise_sigma +- noise_spread.
struct DomainParams {
  double brightness = 0.0;
  double brightness_spread = 0.0;
  double noise_sigma = 0.012;
  double noise_spread = 0.0;
  std::array<double, 3> color_gain{1.0, 1.0, 1.0};
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t live_count = 200;
  std::size_t attack_count = 100;  // per attack type
  std::size_t image_size = 64;
  std::vector<AttackType> attacks{AttackType::print_lattice, AttackType::replay_moire};
  std::string domain_tag = "train";
  DomainParams domain;
  /// Lattice pitch in pixels for print attacks.
  std::size_t lattice_period = 4;
  /// Relative amplitude of per-pixel skin grain on live and reproduced faces.
  double skin_grain = 0.08;
  /// Largest tone offset of a reproduction medium (prints darker, replays brighter).
  double media_tone = 0.0;

  void validate() const;
};

struct Sample {
  std::string sample_id;
  Tensor<float> image;  // [1,3,S,S] in [0,1]
  Tensor<float> depth;  // [1,1,S/8,S/8]; live max 1, attacks all zero
  bool live = true;
  std::string attack;   // attack type name, empty for live
  std::string domain_tag;
};

/// Live faces: a shaded smooth bump with skin texture and per-pixel grain;
/// depth is the bump height at S/8, normalised to max 1. Attacks reproduce a
/// face through a medium that lowers contrast and blurs away the grain, then
/// adds a periodic lattice (prints) or interfering sinusoids (replays), with
/// an optional tone offset (prints darker, replays brighter). Sample i
/// depends only on (seed, class, i).
std::vector<Sample> generate(const SynthConfig& config);

/// Samples stacked into a batch: images [N,3,S,S], depths [N,1,D,D].
struct Batch {
  Tensor<float> images;
  Tensor<float> depths;
};
Batch make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices);

/// Mean pixel value over all samples and channels.
double mean_intensity(const std::vector<Sample>& samples);

}  // namespace cdcnet
