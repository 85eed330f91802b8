#include "cdcnet/cdc/cdc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cdcnet {

std::string describe(const ThetaMode& mode) {
  std::ostringstream os;
  if (const auto* f = std::get_if<FixedTheta>(&mode)) os << "fixed(" << f->theta << ")";
  else os << "adaptive(pre_theta=" << std::get<AdaptiveTheta>(mode).initial_pre_theta << ")";
  return os.str();
}

namespace {

void check_geometry(const Shape& in, const Shape& w, const ConvGeometry& g) {
  if (w.h != g.kernel || w.w != g.kernel) {
    throw ShapeError("cdc: weights " + w.str() + " do not match kernel " + std::to_string(g.kernel));
  }
  if (g.kernel % 2 == 0) throw ShapeError("cdc: kernel extent must be odd");
  if (in.c != w.c) {
    throw ShapeError("cdc: shape mismatch on axis C (input has " + std::to_string(in.c) +
                     " channels, weights expect " + std::to_string(w.c) + ")");
  }
}

long centre_padding(const ConvGeometry& g) {
  return static_cast<long>(g.padding) - static_cast<long>(g.kernel / 2);
}

}  // namespace

template <class T>
Tensor<T> cdc_forward_direct(const Tensor<T>& input, const Tensor<T>& weights, const ConvGeometry& g, T theta) {
  const Shape in = input.shape();
  const Shape ws = weights.shape();
  check_geometry(in, ws, g);
  const long pad = static_cast<long>(g.padding);
  const std::size_t oh = conv_output_extent(in.h, g.kernel, g.stride, pad);
  const std::size_t ow = conv_output_extent(in.w, g.kernel, g.stride, pad);
  const long H = static_cast<long>(in.h), W = static_cast<long>(in.w);
  const long half = static_cast<long>(g.kernel / 2);
  auto sample = [&](std::size_t n, std::size_t c, long r, long q) -> T {
    return (r < 0 || r >= H || q < 0 || q >= W) ? T(0) : input.at(n, c, r, q);
  };

  Tensor<T> out(Shape{in.n, ws.n, oh, ow});
  for (std::size_t n = 0; n < in.n; ++n)
    for (std::size_t o = 0; o < ws.n; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          const long r0 = static_cast<long>(i * g.stride) - pad;
          const long q0 = static_cast<long>(j * g.stride) - pad;
          T diff = 0, intensity = 0;
          for (std::size_t c = 0; c < in.c; ++c) {
            const T centre = sample(n, c, r0 + half, q0 + half);
            for (std::size_t kh = 0; kh < g.kernel; ++kh)
              for (std::size_t kw = 0; kw < g.kernel; ++kw) {
                const T w = weights.at(o, c, kh, kw);
                const T x = sample(n, c, r0 + static_cast<long>(kh), q0 + static_cast<long>(kw));
                diff += w * (x - centre);
                intensity += w * x;
              }
          }
          out.at(n, o, i, j) = theta * diff + (T(1) - theta) * intensity;
        }
  return out;
}

template <class T>
Tensor<T> kernel_difference(const Tensor<T>& weights) {
  const Shape ws = weights.shape();
  Tensor<T> kd(Shape{ws.n, ws.c, 1, 1});
  const std::size_t window = ws.plane();
  for (std::size_t oi = 0; oi < ws.n * ws.c; ++oi) {
    T acc = 0;
    const T* p = weights.raw() + oi * window;
    for (std::size_t k = 0; k < window; ++k) acc += p[k];
    kd[oi] = acc;
  }
  return kd;
}

template <class T>
Var<T> kernel_difference(Var<T> weights) {
  return weights.tape().record(kernel_difference(weights.value()), {weights},
                               [weights](const Tensor<T>& g, GradSink<T>& sink) {
    Tensor<T>& dw = sink.buffer(weights);
    const std::size_t window = dw.shape().plane();
    for (std::size_t oi = 0; oi < g.numel(); ++oi) {
      T* p = dw.raw() + oi * window;
      for (std::size_t k = 0; k < window; ++k) p[k] += g[oi];
    }
  });
}

template <class T>
Tensor<T> cdc_forward_decomposed(const Tensor<T>& input, const Tensor<T>& weights, const ConvGeometry& g, T theta) {
  check_geometry(input.shape(), weights.shape(), g);
  Tensor<T> out = conv2d_forward(input, weights, g.stride, static_cast<long>(g.padding));
  if (theta == T(0)) return out;
  const Tensor<T> centre = conv2d_forward(input, kernel_difference(weights), g.stride, centre_padding(g));
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= theta * centre[i];
  return out;
}

template <class T>
Var<T> cdc_conv(Var<T> input, Var<T> weights, const ConvGeometry& g, T theta) {
  check_geometry(input.shape(), weights.shape(), g);
  Var<T> vanilla = conv2d(input, weights, g);
  if (theta == T(0)) return vanilla;
  Var<T> centre = conv2d_signed(input, kernel_difference(weights), g.stride, centre_padding(g));
  return sub(vanilla, scale(centre, theta));
}

template <class T>
Var<T> cdc_conv(Var<T> input, Var<T> weights, const ConvGeometry& g, Var<T> theta) {
  check_geometry(input.shape(), weights.shape(), g);
  Var<T> vanilla = conv2d(input, weights, g);
  Var<T> centre = conv2d_signed(input, kernel_difference(weights), g.stride, centre_padding(g));
  return sub(vanilla, scale_by(centre, theta));
}

template <class T>
CdcLayer<T>::CdcLayer(std::string name, std::size_t in_channels, std::size_t out_channels, ThetaMode mode,
                      ConvGeometry geometry)
    : geometry_(geometry),
      mode_(mode),
      weight_{name + ".weight", Tensor<T>(Shape{out_channels, in_channels, geometry.kernel, geometry.kernel}), true},
      pre_theta_{name + ".pre_theta", Tensor<T>::scalar(T(0)), false},
      theta_buffer_(Tensor<T>::scalar(T(0))),
      name_(std::move(name)) {
  if (in_channels == 0 || out_channels == 0) throw ConfigError("cdc layer '" + name_ + "': channel counts must be positive");
  if (geometry.kernel == 0 || geometry.kernel % 2 == 0) throw ConfigError("cdc layer '" + name_ + "': kernel must be odd");
  if (const auto* f = std::get_if<FixedTheta>(&mode_)) {
    if (!(f->theta >= 0.0 && f->theta <= 1.0)) {
      throw ConfigError("cdc layer '" + name_ + "': fixed theta must lie in [0,1], got " + std::to_string(f->theta));
    }
    theta_buffer_[0] = static_cast<T>(f->theta);
  } else {
    const double pre = std::get<AdaptiveTheta>(mode_).initial_pre_theta;
    if (!std::isfinite(pre)) throw ConfigError("cdc layer '" + name_ + "': pre_theta must be finite");
    pre_theta_.value[0] = static_cast<T>(pre);
    pre_theta_.trainable = true;
  }
}

template <class T>
T adaptive_theta_value(T pre) {
  const T s = pre >= T(0) ? T(1) / (T(1) + std::exp(-pre)) : std::exp(pre) / (T(1) + std::exp(pre));
  // sigmoid rounds to exactly 1 for large arguments; keep theta strictly inside (0,1).
  return std::min(s, std::nextafter(T(1), T(0)));
}

template <class T>
Var<T> adaptive_theta(Var<T> pre_theta) {
  Tensor<T> out(Shape{1, 1, 1, 1}, adaptive_theta_value(pre_theta.value().item()));
  return pre_theta.tape().record(std::move(out), {pre_theta}, [pre_theta](const Tensor<T>& gy, GradSink<T>& sink) {
    if (!sink.wants(pre_theta)) return;
    const T s = adaptive_theta_value(pre_theta.value().item());
    sink.buffer(pre_theta)[0] += gy[0] * s * (T(1) - s);
  });
}

template <class T>
T CdcLayer<T>::theta() const {
  if (!adaptive()) return theta_buffer_[0];
  return adaptive_theta_value(pre_theta_.value[0]);
}

template <class T>
Var<T> CdcLayer<T>::forward(Tape<T>& tape, Var<T> input) {
  Var<T> w = tape.watch(weight_);
  if (!adaptive()) return cdc_conv(input, w, geometry_, theta_buffer_[0]);
  return cdc_conv(input, w, geometry_, adaptive_theta(tape.watch(pre_theta_)));
}

template <class T>
Tensor<T> CdcLayer<T>::forward_direct(const Tensor<T>& input) const {
  return cdc_forward_direct(input, weight_.value, geometry_, theta());
}

template <class T>
Tensor<T> CdcLayer<T>::forward_decomposed(const Tensor<T>& input) const {
  return cdc_forward_decomposed(input, weight_.value, geometry_, theta());
}

template <class T>
void CdcLayer<T>::collect(StateDict<T>& out) {
  out.params.push_back(&weight_);
  if (adaptive()) out.params.push_back(&pre_theta_);
  else out.buffers.emplace_back(name_ + ".theta", &theta_buffer_);
}

#define CDCNET_INSTANTIATE_CDC(T)                                                                       \
  template Tensor<T> cdc_forward_direct(const Tensor<T>&, const Tensor<T>&, const ConvGeometry&, T);    \
  template Tensor<T> cdc_forward_decomposed(const Tensor<T>&, const Tensor<T>&, const ConvGeometry&, T); \
  template Tensor<T> kernel_difference(const Tensor<T>&);                                                \
  template Var<T> kernel_difference(Var<T>);                                                             \
  template Var<T> cdc_conv(Var<T>, Var<T>, const ConvGeometry&, T);                                      \
  template Var<T> cdc_conv(Var<T>, Var<T>, const ConvGeometry&, Var<T>);                                 \
  template T adaptive_theta_value(T);                                                                    \
  template Var<T> adaptive_theta(Var<T>);                                                                \
  template class CdcLayer<T>;

CDCNET_INSTANTIATE_CDC(float)
CDCNET_INSTANTIATE_CDC(double)

}  // namespace cdcnet
