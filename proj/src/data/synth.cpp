#include "cdcnet/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cdcnet/tensor/rng.hpp"

namespace cdcnet {

std::string attack_name(AttackType t) { return t == AttackType::print_lattice ? "print_lattice" : "replay_moire"; }

AttackType parse_attack(const std::string& name) {
  if (name == "print_lattice") return AttackType::print_lattice;
  if (name == "replay_moire") return AttackType::replay_moire;
  throw ConfigError("unknown attack type '" + name + "' (expected print_lattice or replay_moire)");
}

void SynthConfig::validate() const {
  if (image_size < 8 || image_size % 8 != 0) {
    throw ConfigError("synth: image_size must be a positive multiple of 8, got " + std::to_string(image_size));
  }
  if (live_count == 0) throw ConfigError("synth: live_count must be at least 1");
  if (!attacks.empty() && attack_count == 0) throw ConfigError("synth: attack_count must be at least 1");
  if (lattice_period < 2 || lattice_period > image_size / 2) throw ConfigError("synth: lattice_period out of range");
  if (!(domain.noise_sigma - domain.noise_spread >= 0) || !(domain.noise_spread >= 0)) {
    throw ConfigError("synth: noise_sigma - noise_spread must be non-negative");
  }
  if (!(domain.brightness_spread >= 0) || !std::isfinite(domain.brightness)) {
    throw ConfigError("synth: brightness must be finite with a non-negative spread");
  }
  if (!(skin_grain >= 0 && skin_grain < 1)) throw ConfigError("synth: skin_grain must lie in [0, 1)");
  if (!(media_tone >= 0 && media_tone < 1)) throw ConfigError("synth: media_tone must lie in [0, 1)");
  for (std::size_t i = 0; i < attacks.size(); ++i)
    for (std::size_t j = i + 1; j < attacks.size(); ++j)
      if (attacks[i] == attacks[j]) throw ConfigError("synth: attack types listed twice");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Face {
  std::vector<float> rgb;     // [3][S][S]
  std::vector<double> height; // [S][S], 0 outside the face
};

Face render_face(Rng& rng, std::size_t S, double grain_amp) {
  const double s = static_cast<double>(S);
  const double cx = rng.uniform(0.4, 0.6) * s, cy = rng.uniform(0.4, 0.6) * s;
  const double rx = rng.uniform(0.28, 0.38) * s, ry = rx * rng.uniform(1.0, 1.25);
  const double relief = 0.5 * rx;
  double lx = rng.uniform(-0.5, 0.5), ly = rng.uniform(-0.5, 0.5), lz = 1.0;
  const double ln = std::sqrt(lx * lx + ly * ly + lz * lz);
  lx /= ln, ly /= ln, lz /= ln;
  const double tone = rng.uniform(0.55, 0.8);
  const double albedo[3] = {tone, tone * 0.82, tone * 0.7};
  double bg[3], bg_slope[2] = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
  for (double& b : bg) b = rng.uniform(0.25, 0.55);
  struct Wave {
    double fx, fy, phase;
  } waves[3];
  for (Wave& w : waves) {
    const double f = rng.uniform(0.02, 0.08), a = rng.uniform(0, kTwoPi);
    w = {f * std::cos(a), f * std::sin(a), rng.uniform(0, kTwoPi)};
  }

  Face face;
  face.height.assign(S * S, 0.0);
  auto h_at = [&](double x, double y) {
    const double u = (x - cx) / rx, v = (y - cy) / ry;
    return std::sqrt(std::max(0.0, 1.0 - u * u - v * v));
  };
  for (std::size_t y = 0; y < S; ++y)
    for (std::size_t x = 0; x < S; ++x) face.height[y * S + x] = h_at(x + 0.5, y + 0.5);

  // Per-pixel skin grain, shared by the three channels.
  std::vector<double> grain(S * S);
  for (double& g : grain) g = grain_amp * rng.uniform(-1, 1);

  face.rgb.assign(3 * S * S, 0.0f);
  for (std::size_t y = 0; y < S; ++y) {
    for (std::size_t x = 0; x < S; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double h = face.height[y * S + x];
      double tex = 0;
      for (const Wave& w : waves) tex += 0.015 * std::sin(kTwoPi * (w.fx * px + w.fy * py) + w.phase);
      double shade = 0;
      if (h > 0) {
        const double dzdx = relief * (h_at(px + 0.5, py) - h_at(px - 0.5, py));
        const double dzdy = relief * (h_at(px, py + 0.5) - h_at(px, py - 0.5));
        const double nn = std::sqrt(dzdx * dzdx + dzdy * dzdy + 1.0);
        shade = 0.35 + 0.65 * std::max(0.0, (-dzdx * lx - dzdy * ly + lz) / nn);
      }
      const double ramp = bg_slope[0] * (px / s - 0.5) + bg_slope[1] * (py / s - 0.5);
      // Blend over a thin rim so the silhouette stays smooth.
      const double inside = std::min(1.0, h * 4.0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double skin = albedo[c] * shade * (1.0 + tex + grain[y * S + x]);
        const double back = bg[c] + ramp;
        face.rgb[(c * S + y) * S + x] = static_cast<float>(inside * skin + (1.0 - inside) * back);
      }
    }
  }
  return face;
}

/// Reduced contrast and a 3x3 box blur, as a reproduced face loses both.
void flatten(std::vector<float>& rgb, std::size_t S, double contrast) {
  std::vector<float> out(rgb.size());
  for (std::size_t c = 0; c < 3; ++c) {
    const float* p = rgb.data() + c * S * S;
    double mean = 0;
    for (std::size_t i = 0; i < S * S; ++i) mean += p[i];
    mean /= static_cast<double>(S * S);
    for (std::size_t y = 0; y < S; ++y)
      for (std::size_t x = 0; x < S; ++x) {
        double acc = 0;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const long yy = static_cast<long>(y) + dy, xx = static_cast<long>(x) + dx;
            if (yy < 0 || xx < 0 || yy >= static_cast<long>(S) || xx >= static_cast<long>(S)) continue;
            acc += p[yy * S + xx];
            ++n;
          }
        out[(c * S + y) * S + x] = static_cast<float>(mean + contrast * (acc / n - mean));
      }
  }
  rgb.swap(out);
}

void add_lattice(std::vector<float>& rgb, std::size_t S, std::size_t period, Rng& rng) {
  const double amp = rng.uniform(0.06, 0.12);
  const std::size_t ox = rng.below(period), oy = rng.below(period);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < S; ++y)
      for (std::size_t x = 0; x < S; ++x) {
        const bool line = (x + ox) % period == 0 || (y + oy) % period == 0;
        if (line) rgb[(c * S + y) * S + x] *= static_cast<float>(1.0 - amp);
      }
}

void add_moire(std::vector<float>& rgb, std::size_t S, Rng& rng) {
  const double amp = rng.uniform(0.05, 0.1);
  double k[2][3];
  for (auto& w : k) {
    const double f = rng.uniform(0.18, 0.3), a = rng.uniform(0, kTwoPi);
    w[0] = f * std::cos(a), w[1] = f * std::sin(a), w[2] = rng.uniform(0, kTwoPi);
  }
  const double fringe[3] = {1.0, 0.9, 1.1};
  for (std::size_t y = 0; y < S; ++y)
    for (std::size_t x = 0; x < S; ++x) {
      double v = 0;
      for (const auto& w : k) v += std::sin(kTwoPi * (w[0] * x + w[1] * y) + w[2]);
      for (std::size_t c = 0; c < 3; ++c) rgb[(c * S + y) * S + x] += static_cast<float>(amp * fringe[c] * v / 2);
    }
}

/// Uniform tone offset of the reproduction medium.
void add_tone(std::vector<float>& rgb, double offset) {
  for (float& v : rgb) v = static_cast<float>(v + offset);
}

void apply_domain(std::vector<float>& rgb, std::size_t S, const DomainParams& d, Rng& rng) {
  const double b = d.brightness + rng.uniform(-d.brightness_spread, d.brightness_spread);
  const double sigma = d.noise_sigma + rng.uniform(-d.noise_spread, d.noise_spread);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < S * S; ++i) {
      float& v = rgb[c * S * S + i];
      const double x = d.color_gain[c] * v + b + sigma * rng.normal();
      v = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }
}

Tensor<float> depth_target(const std::vector<double>& height, std::size_t S) {
  const std::size_t D = S / 8;
  Tensor<float> depth(Shape{1, 1, D, D});
  double peak = 0;
  std::vector<double> cells(D * D, 0.0);
  for (std::size_t y = 0; y < S; ++y)
    for (std::size_t x = 0; x < S; ++x) cells[(y / 8) * D + x / 8] += height[y * S + x] / 64.0;
  for (double v : cells) peak = std::max(peak, v);
  for (std::size_t i = 0; i < D * D; ++i) depth[i] = peak > 0 ? static_cast<float>(cells[i] / peak) : 0.0f;
  return depth;
}

std::string make_id(const std::string& cls, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return cls + "_" + buf;
}

}  // namespace

std::vector<Sample> generate(const SynthConfig& config) {
  config.validate();
  const std::size_t S = config.image_size;
  const Rng root(config.seed);
  std::vector<Sample> out;
  auto emit = [&](Face& face, std::string id, bool live, std::string attack, Rng& rng) {
    apply_domain(face.rgb, S, config.domain, rng);
    Sample s;
    s.sample_id = std::move(id);
    s.image = Tensor<float>(Shape{1, 3, S, S}, std::move(face.rgb));
    s.depth = live ? depth_target(face.height, S) : Tensor<float>(Shape{1, 1, S / 8, S / 8});
    s.live = live;
    s.attack = std::move(attack);
    s.domain_tag = config.domain_tag;
    out.push_back(std::move(s));
  };
  const Rng live_root = root.fork(0);
  for (std::size_t i = 0; i < config.live_count; ++i) {
    Rng rng = live_root.fork(i);
    Face face = render_face(rng, S, config.skin_grain);
    emit(face, make_id("live", i), true, "", rng);
  }
  for (AttackType t : config.attacks) {
    const Rng attack_root = root.fork(1 + static_cast<std::uint64_t>(t));
    for (std::size_t i = 0; i < config.attack_count; ++i) {
      Rng rng = attack_root.fork(i);
      Face face = render_face(rng, S, config.skin_grain);
      flatten(face.rgb, S, rng.uniform(0.6, 0.8));
      if (t == AttackType::print_lattice) {
        add_tone(face.rgb, -config.media_tone * rng.uniform(0.4, 1.0));
        add_lattice(face.rgb, S, config.lattice_period, rng);
      } else {
        add_tone(face.rgb, config.media_tone * rng.uniform(0.4, 1.0));
        add_moire(face.rgb, S, rng);
      }
      emit(face, make_id(attack_name(t), i), false, attack_name(t), rng);
    }
  }
  return out;
}

Batch make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw DataError("empty batch");
  const Shape is = samples.at(indices[0]).image.shape(), ds = samples.at(indices[0]).depth.shape();
  Batch b{Tensor<float>(Shape{indices.size(), is.c, is.h, is.w}), Tensor<float>(Shape{indices.size(), ds.c, ds.h, ds.w})};
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Sample& s = samples.at(indices[k]);
    if (!(s.image.shape() == is) || !(s.depth.shape() == ds)) throw DataError("batch samples differ in shape");
    std::copy(s.image.data().begin(), s.image.data().end(), b.images.raw() + k * is.numel());
    std::copy(s.depth.data().begin(), s.depth.data().end(), b.depths.raw() + k * ds.numel());
  }
  return b;
}

double mean_intensity(const std::vector<Sample>& samples) {
  double acc = 0;
  std::size_t n = 0;
  for (const Sample& s : samples) {
    for (float v : s.image.data()) acc += v;
    n += s.image.numel();
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

}  // namespace cdcnet
