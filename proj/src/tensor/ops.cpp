#include <cmath>
#include <limits>
#include <memory>

#include "cdcnet/tensor/ops.hpp"

namespace cdcnet {

namespace {

template <class T>
T sigmoid_scalar(T v) {
  // Split by sign so large |v| neither overflows nor loses the small tail.
  if (v >= T(0)) {
    const T e = std::exp(-v);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(v);
  return e / (T(1) + e);
}

}  // namespace

template <class T>
Var<T> relu(Var<T> x) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  return x.tape().record(std::move(out), {x}, [x](const Tensor<T>& g, GradSink<T>& sink) {
    const Tensor<T>& xv = x.value();
    Tensor<T>& dx = sink.buffer(x);
    for (std::size_t i = 0; i < xv.numel(); ++i)
      if (xv[i] > T(0)) dx[i] += g[i];
  });
}

template <class T>
Var<T> sigmoid(Var<T> x) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = sigmoid_scalar(xv[i]);
  auto saved = std::make_shared<Tensor<T>>(out);
  return x.tape().record(std::move(out), {x}, [x, saved](const Tensor<T>& g, GradSink<T>& sink) {
    Tensor<T>& dx = sink.buffer(x);
    const Tensor<T>& y = *saved;
    for (std::size_t i = 0; i < y.numel(); ++i) dx[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor<T> out = a.value();
  out += b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b](const Tensor<T>& g, GradSink<T>& sink) {
    sink.add(a, g);
    sink.add(b, g);
  });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor<T> out = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](const Tensor<T>& g, GradSink<T>& sink) {
    sink.add(a, g);
    if (sink.wants(b)) {
      Tensor<T>& db = sink.buffer(b);
      for (std::size_t i = 0; i < g.numel(); ++i) db[i] -= g[i];
    }
  });
}

template <class T>
Var<T> hadamard(Var<T> a, Var<T> b) {
  const Shape sa = a.shape(), sb = b.shape();
  const bool broadcast = sb.c == 1 && sa.c != 1;
  if (broadcast) require_same_shape(Shape{sa.n, 1, sa.h, sa.w}, sb, "hadamard");
  else require_same_shape(sa, sb, "hadamard");
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  Tensor<T> out(sa);
  const std::size_t plane = sa.plane();
  for (std::size_t n = 0; n < sa.n; ++n)
    for (std::size_t c = 0; c < sa.c; ++c) {
      const std::size_t ao = (n * sa.c + c) * plane;
      const std::size_t bo = broadcast ? n * plane : ao;
      for (std::size_t i = 0; i < plane; ++i) out[ao + i] = av[ao + i] * bv[bo + i];
    }
  return a.tape().record(std::move(out), {a, b}, [a, b, broadcast](const Tensor<T>& g, GradSink<T>& sink) {
    const Tensor<T>& av = a.value();
    const Tensor<T>& bv = b.value();
    const Shape sa = av.shape();
    const std::size_t plane = sa.plane();
    Tensor<T>* da = sink.wants(a) ? &sink.buffer(a) : nullptr;
    Tensor<T>* db = sink.wants(b) ? &sink.buffer(b) : nullptr;
    for (std::size_t n = 0; n < sa.n; ++n)
      for (std::size_t c = 0; c < sa.c; ++c) {
        const std::size_t ao = (n * sa.c + c) * plane;
        const std::size_t bo = broadcast ? n * plane : ao;
        for (std::size_t i = 0; i < plane; ++i) {
          if (da) (*da)[ao + i] += g[ao + i] * bv[bo + i];
          if (db) (*db)[bo + i] += g[ao + i] * av[ao + i];
        }
      }
  });
}

template <class T>
Var<T> scale(Var<T> x, T factor) {
  Tensor<T> out = x.value();
  out *= factor;
  return x.tape().record(std::move(out), {x}, [x, factor](const Tensor<T>& g, GradSink<T>& sink) {
    Tensor<T>& dx = sink.buffer(x);
    for (std::size_t i = 0; i < g.numel(); ++i) dx[i] += factor * g[i];
  });
}

template <class T>
Var<T> scale_by(Var<T> x, Var<T> factor) {
  if (factor.value().numel() != 1) throw ShapeError("scale_by: factor must be [1,1,1,1], got " + factor.shape().str());
  const T f = factor.value()[0];
  Tensor<T> out = x.value();
  out *= f;
  return x.tape().record(std::move(out), {x, factor}, [x, factor](const Tensor<T>& g, GradSink<T>& sink) {
    const Tensor<T>& xv = x.value();
    if (sink.wants(x)) {
      const T f = factor.value()[0];
      Tensor<T>& dx = sink.buffer(x);
      for (std::size_t i = 0; i < g.numel(); ++i) dx[i] += f * g[i];
    }
    if (sink.wants(factor)) {
      T acc = 0;
      for (std::size_t i = 0; i < g.numel(); ++i) acc += g[i] * xv[i];
      sink.buffer(factor)[0] += acc;
    }
  });
}

template <class T>
Var<T> add_n(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw ShapeError("add_n: empty input list");
  Tensor<T> out = xs.front().value();
  for (std::size_t k = 1; k < xs.size(); ++k) {
    require_same_shape(out.shape(), xs[k].shape(), "add_n");
    out += xs[k].value();
  }
  return xs.front().tape().record(std::move(out), xs, [xs](const Tensor<T>& g, GradSink<T>& sink) {
    for (const auto& x : xs) sink.add(x, g);
  });
}

template <class T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw ShapeError("concat_channels: empty input list");
  const Shape first = xs.front().shape();
  std::size_t channels = 0;
  for (const auto& x : xs) {
    const Shape s = x.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw ShapeError("concat_channels: spatial/batch mismatch (" + first.str() + " vs " + s.str() + ")");
    }
    channels += s.c;
  }
  Tensor<T> out(Shape{first.n, channels, first.h, first.w});
  const std::size_t plane = first.plane();
  for (std::size_t n = 0; n < first.n; ++n) {
    std::size_t c0 = 0;
    for (const auto& x : xs) {
      const Tensor<T>& v = x.value();
      const std::size_t block = v.shape().c * plane;
      std::copy_n(v.raw() + n * block, block, out.raw() + (n * channels + c0) * plane);
      c0 += v.shape().c;
    }
  }
  return xs.front().tape().record(std::move(out), xs, [xs, channels](const Tensor<T>& g, GradSink<T>& sink) {
    const Shape s = g.shape();
    const std::size_t plane = s.plane();
    std::size_t c0 = 0;
    for (const auto& x : xs) {
      const std::size_t cx = x.shape().c;
      if (sink.wants(x)) {
        Tensor<T>& dx = sink.buffer(x);
        for (std::size_t n = 0; n < s.n; ++n) {
          const T* src = g.raw() + (n * channels + c0) * plane;
          T* dst = dx.raw() + n * cx * plane;
          for (std::size_t i = 0; i < cx * plane; ++i) dst[i] += src[i];
        }
      }
      c0 += cx;
    }
  });
}

template <class T>
std::vector<Var<T>> split_channels(Var<T> x, const std::vector<std::size_t>& sizes) {
  const Shape s = x.shape();
  std::size_t total = 0;
  for (auto c : sizes) total += c;
  if (total != s.c) throw ShapeError("split_channels: sizes sum to " + std::to_string(total) + ", input has " +
                                     std::to_string(s.c) + " channels");
  std::vector<Var<T>> parts;
  const std::size_t plane = s.plane();
  std::size_t c0 = 0;
  for (auto cx : sizes) {
    Tensor<T> out(Shape{s.n, cx, s.h, s.w});
    for (std::size_t n = 0; n < s.n; ++n)
      std::copy_n(x.value().raw() + (n * s.c + c0) * plane, cx * plane, out.raw() + n * cx * plane);
    parts.push_back(x.tape().record(std::move(out), {x}, [x, c0, cx](const Tensor<T>& g, GradSink<T>& sink) {
      const Shape s = x.shape();
      const std::size_t plane = s.plane();
      Tensor<T>& dx = sink.buffer(x);
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* src = g.raw() + n * cx * plane;
        T* dst = dx.raw() + (n * s.c + c0) * plane;
        for (std::size_t i = 0; i < cx * plane; ++i) dst[i] += src[i];
      }
    }));
    c0 += cx;
  }
  return parts;
}

template <class T>
Var<T> max_pool2d(Var<T> x, std::size_t kernel, std::size_t stride, std::size_t padding) {
  const Shape s = x.shape();
  if (kernel == 0 || stride == 0) throw ShapeError("max_pool2d: kernel and stride must be positive");
  if (padding >= kernel) throw ShapeError("max_pool2d: padding must be smaller than kernel");
  const std::size_t oh = conv_output_extent(s.h, kernel, stride, static_cast<long>(padding));
  const std::size_t ow = conv_output_extent(s.w, kernel, stride, static_cast<long>(padding));
  Tensor<T> out(Shape{s.n, s.c, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  const Tensor<T>& xv = x.value();
  const long H = static_cast<long>(s.h), W = static_cast<long>(s.w);
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < s.n * s.c; ++nc) {
    const std::size_t base = nc * s.plane();
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j, ++o) {
        T best = -std::numeric_limits<T>::infinity();
        std::size_t best_idx = std::numeric_limits<std::size_t>::max();
        for (std::size_t ki = 0; ki < kernel; ++ki) {
          const long r = static_cast<long>(i * stride + ki) - static_cast<long>(padding);
          if (r < 0 || r >= H) continue;
          for (std::size_t kj = 0; kj < kernel; ++kj) {
            const long c = static_cast<long>(j * stride + kj) - static_cast<long>(padding);
            if (c < 0 || c >= W) continue;
            const std::size_t idx = base + static_cast<std::size_t>(r * W + c);
            if (best_idx == std::numeric_limits<std::size_t>::max() || xv[idx] > best) {
              best = xv[idx];
              best_idx = idx;
            }
          }
        }
        out[o] = best;
        (*argmax)[o] = best_idx;
      }
  }
  return x.tape().record(std::move(out), {x}, [x, argmax](const Tensor<T>& g, GradSink<T>& sink) {
    Tensor<T>& dx = sink.buffer(x);
    for (std::size_t o = 0; o < g.numel(); ++o) dx[(*argmax)[o]] += g[o];
  });
}

template <class T>
Var<T> channel_avg(Var<T> x) {
  const Shape s = x.shape();
  const std::size_t plane = s.plane();
  Tensor<T> out(Shape{s.n, 1, s.h, s.w});
  const Tensor<T>& xv = x.value();
  const T inv = T(1) / static_cast<T>(s.c);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      const T* src = xv.raw() + (n * s.c + c) * plane;
      T* dst = out.raw() + n * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
    }
  out *= inv;
  return x.tape().record(std::move(out), {x}, [x, inv](const Tensor<T>& g, GradSink<T>& sink) {
    const Shape s = x.shape();
    const std::size_t plane = s.plane();
    Tensor<T>& dx = sink.buffer(x);
    for (std::size_t n = 0; n < s.n; ++n)
      for (std::size_t c = 0; c < s.c; ++c) {
        T* dst = dx.raw() + (n * s.c + c) * plane;
        const T* src = g.raw() + n * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] += inv * src[i];
      }
  });
}

template <class T>
Var<T> channel_max(Var<T> x) {
  const Shape s = x.shape();
  const std::size_t plane = s.plane();
  Tensor<T> out(Shape{s.n, 1, s.h, s.w});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  const Tensor<T>& xv = x.value();
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t i = 0; i < plane; ++i) {
      std::size_t best = n * s.c * plane + i;
      for (std::size_t c = 1; c < s.c; ++c) {
        const std::size_t idx = (n * s.c + c) * plane + i;
        if (xv[idx] > xv[best]) best = idx;
      }
      out[n * plane + i] = xv[best];
      (*argmax)[n * plane + i] = best;
    }
  return x.tape().record(std::move(out), {x}, [x, argmax](const Tensor<T>& g, GradSink<T>& sink) {
    Tensor<T>& dx = sink.buffer(x);
    for (std::size_t o = 0; o < g.numel(); ++o) dx[(*argmax)[o]] += g[o];
  });
}

template <class T>
Var<T> sum_all(Var<T> x) {
  T acc = 0;
  for (T v : x.value().data()) acc += v;
  return x.tape().record(Tensor<T>::scalar(acc), {x}, [x](const Tensor<T>& g, GradSink<T>& sink) {
    Tensor<T>& dx = sink.buffer(x);
    const T gv = g[0];
    for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] += gv;
  });
}

template <class T>
Var<T> mean_all(Var<T> x) {
  const std::size_t count = x.value().numel();
  if (count == 0) throw ShapeError("mean_all: empty tensor");
  T acc = 0;
  for (T v : x.value().data()) acc += v;
  const T inv = T(1) / static_cast<T>(count);
  return x.tape().record(Tensor<T>::scalar(acc * inv), {x}, [x, inv](const Tensor<T>& g, GradSink<T>& sink) {
    Tensor<T>& dx = sink.buffer(x);
    const T gv = g[0] * inv;
    for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] += gv;
  });
}

template <class T>
Var<T> softmax(Var<T> x) {
  const Tensor<T>& xv = x.value();
  if (xv.numel() == 0) throw ShapeError("softmax: empty tensor");
  T top = xv[0];
  for (T v : xv.data()) top = std::max(top, v);
  Tensor<T> out(xv.shape());
  T total = 0;
  for (std::size_t i = 0; i < xv.numel(); ++i) {
    out[i] = std::exp(xv[i] - top);
    total += out[i];
  }
  out *= T(1) / total;
  auto saved = std::make_shared<Tensor<T>>(out);
  return x.tape().record(std::move(out), {x}, [x, saved](const Tensor<T>& g, GradSink<T>& sink) {
    const Tensor<T>& y = *saved;
    T dot = 0;
    for (std::size_t i = 0; i < y.numel(); ++i) dot += g[i] * y[i];
    Tensor<T>& dx = sink.buffer(x);
    for (std::size_t i = 0; i < y.numel(); ++i) dx[i] += y[i] * (g[i] - dot);
  });
}

template <class T>
Var<T> element(Var<T> x, std::size_t index) {
  if (index >= x.value().numel()) throw ShapeError("element: index out of range");
  return x.tape().record(Tensor<T>::scalar(x.value()[index]), {x},
                         [x, index](const Tensor<T>& g, GradSink<T>& sink) { sink.buffer(x)[index] += g[0]; });
}

template <class T>
Var<T> batchnorm(Var<T> input, Var<T> scale_v, Var<T> shift_v, BatchNormState<T>& state, Mode mode) {
  const Shape s = input.shape();
  const Shape cs{1, s.c, 1, 1};
  require_same_shape(scale_v.shape(), cs, "batchnorm scale");
  require_same_shape(shift_v.shape(), cs, "batchnorm shift");
  require_same_shape(state.running_mean.shape(), cs, "batchnorm running_mean");
  require_same_shape(state.running_var.shape(), cs, "batchnorm running_var");
  const std::size_t plane = s.plane();
  const std::size_t count = s.n * plane;
  const Tensor<T>& x = input.value();
  const Tensor<T>& gamma = scale_v.value();
  const Tensor<T>& beta = shift_v.value();
  const T eps = static_cast<T>(state.epsilon);

  auto mean = std::make_shared<std::vector<T>>(s.c);
  auto inv_std = std::make_shared<std::vector<T>>(s.c);
  if (mode == Mode::train) {
    if (count < 2) throw ShapeError("batchnorm: training mode needs batch*H*W >= 2, got " + std::to_string(count));
    const T mom = static_cast<T>(state.momentum);
    for (std::size_t c = 0; c < s.c; ++c) {
      T acc = 0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* p = x.raw() + (n * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      }
      const T mu = acc / static_cast<T>(count);
      T sq = 0;
      for (std::size_t n = 0; n < s.n; ++n) {
        const T* p = x.raw() + (n * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mu) * (p[i] - mu);
      }
      const T var = sq / static_cast<T>(count);
      (*mean)[c] = mu;
      (*inv_std)[c] = T(1) / std::sqrt(var + eps);
      const T unbiased = sq / static_cast<T>(count - 1);
      state.running_mean[c] = (T(1) - mom) * state.running_mean[c] + mom * mu;
      state.running_var[c] = (T(1) - mom) * state.running_var[c] + mom * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < s.c; ++c) {
      (*mean)[c] = state.running_mean[c];
      (*inv_std)[c] = T(1) / std::sqrt(state.running_var[c] + eps);
    }
  }

  Tensor<T> out(s);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t o = (n * s.c + c) * plane;
      const T a = gamma[c] * (*inv_std)[c];
      const T mu = (*mean)[c];
      for (std::size_t i = 0; i < plane; ++i) out[o + i] = a * (x[o + i] - mu) + beta[c];
    }

  const bool batch_stats = mode == Mode::train;
  return input.tape().record(
      std::move(out), {input, scale_v, shift_v},
      [input, scale_v, shift_v, mean, inv_std, batch_stats](const Tensor<T>& g, GradSink<T>& sink) {
        const Tensor<T>& x = input.value();
        const Tensor<T>& gamma = scale_v.value();
        const Shape s = x.shape();
        const std::size_t plane = s.plane();
        const T m = static_cast<T>(s.n * plane);
        Tensor<T>* dx = sink.wants(input) ? &sink.buffer(input) : nullptr;
        Tensor<T>* dgamma = sink.wants(scale_v) ? &sink.buffer(scale_v) : nullptr;
        Tensor<T>* dbeta = sink.wants(shift_v) ? &sink.buffer(shift_v) : nullptr;
        for (std::size_t c = 0; c < s.c; ++c) {
          const T mu = (*mean)[c], is = (*inv_std)[c];
          T sum_g = 0, sum_gx = 0;
          for (std::size_t n = 0; n < s.n; ++n) {
            const std::size_t o = (n * s.c + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              sum_g += g[o + i];
              sum_gx += g[o + i] * (x[o + i] - mu) * is;
            }
          }
          if (dgamma) (*dgamma)[c] += sum_gx;
          if (dbeta) (*dbeta)[c] += sum_g;
          if (!dx) continue;
          const T k = gamma[c] * is;
          for (std::size_t n = 0; n < s.n; ++n) {
            const std::size_t o = (n * s.c + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              if (batch_stats) {
                const T xhat = (x[o + i] - mu) * is;
                (*dx)[o + i] += k * (g[o + i] - sum_g / m - xhat * sum_gx / m);
              } else {
                (*dx)[o + i] += k * g[o + i];
              }
            }
          }
        }
      });
}

#define CDCNET_INSTANTIATE_OPS(T)                                                                  \
  template Var<T> relu(Var<T>);                                                                    \
  template Var<T> sigmoid(Var<T>);                                                                 \
  template Var<T> add(Var<T>, Var<T>);                                                             \
  template Var<T> sub(Var<T>, Var<T>);                                                             \
  template Var<T> hadamard(Var<T>, Var<T>);                                                        \
  template Var<T> scale(Var<T>, T);                                                                \
  template Var<T> scale_by(Var<T>, Var<T>);                                                        \
  template Var<T> add_n(const std::vector<Var<T>>&);                                               \
  template Var<T> concat_channels(const std::vector<Var<T>>&);                                     \
  template std::vector<Var<T>> split_channels(Var<T>, const std::vector<std::size_t>&);            \
  template Var<T> max_pool2d(Var<T>, std::size_t, std::size_t, std::size_t);                       \
  template Var<T> channel_avg(Var<T>);                                                             \
  template Var<T> channel_max(Var<T>);                                                             \
  template Var<T> sum_all(Var<T>);                                                                 \
  template Var<T> mean_all(Var<T>);                                                                \
  template Var<T> softmax(Var<T>);                                                                 \
  template Var<T> element(Var<T>, std::size_t);                                                    \
  template Var<T> batchnorm(Var<T>, Var<T>, Var<T>, BatchNormState<T>&, Mode);

CDCNET_INSTANTIATE_OPS(float)
CDCNET_INSTANTIATE_OPS(double)

}  // namespace cdcnet
