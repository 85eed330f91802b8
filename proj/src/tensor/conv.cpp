#include <Eigen/Core>

#include "cdcnet/tensor/ops.hpp"

namespace cdcnet {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct Geometry {
  std::size_t channels, height, width, kernel, stride;
  long padding;
  std::size_t out_h, out_w;

  std::size_t rows() const { return channels * kernel * kernel; }
  std::size_t cols() const { return out_h * out_w; }
  bool is_pointwise() const { return kernel == 1 && stride == 1 && padding == 0; }
};

template <class T>
void im2col(const T* x, const Geometry& g, T* col) {
  const long H = static_cast<long>(g.height), W = static_cast<long>(g.width);
  for (std::size_t c = 0; c < g.channels; ++c) {
    const T* plane = x + c * g.height * g.width;
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        T* row = col + ((c * g.kernel + kh) * g.kernel + kw) * g.cols();
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + kh) - g.padding;
          T* dst = row + oh * g.out_w;
          if (ih < 0 || ih >= H) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = plane + ih * W;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const long iw = static_cast<long>(ow * g.stride + kw) - g.padding;
            dst[ow] = (iw < 0 || iw >= W) ? T(0) : src[iw];
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* col, const Geometry& g, T* dx) {
  const long H = static_cast<long>(g.height), W = static_cast<long>(g.width);
  for (std::size_t c = 0; c < g.channels; ++c) {
    T* plane = dx + c * g.height * g.width;
    for (std::size_t kh = 0; kh < g.kernel; ++kh) {
      for (std::size_t kw = 0; kw < g.kernel; ++kw) {
        const T* row = col + ((c * g.kernel + kh) * g.kernel + kw) * g.cols();
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + kh) - g.padding;
          if (ih < 0 || ih >= H) continue;
          const T* src = row + oh * g.out_w;
          T* dst = plane + ih * W;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const long iw = static_cast<long>(ow * g.stride + kw) - g.padding;
            if (iw >= 0 && iw < W) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

template <class T>
Geometry check_geometry(const Shape& in, const Shape& w, std::size_t stride, long padding) {
  if (w.h != w.w) throw ShapeError("conv2d: kernel must be square, got " + w.str());
  if (w.h == 0 || w.h % 2 == 0) throw ShapeError("conv2d: kernel extent must be odd and positive, got " + w.str());
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  if (in.c != w.c) {
    throw ShapeError("conv2d: shape mismatch on axis C (input has " + std::to_string(in.c) +
                     " channels, weights expect " + std::to_string(w.c) + ")");
  }
  Geometry g{in.c, in.h, in.w, w.h, stride, padding, 0, 0};
  g.out_h = conv_output_extent(in.h, w.h, stride, padding);
  g.out_w = conv_output_extent(in.w, w.h, stride, padding);
  return g;
}

template <class T>
void check_bias(const Tensor<T>* bias, std::size_t out_channels) {
  if (bias && !(bias->shape() == Shape{1, out_channels, 1, 1})) {
    throw ShapeError("conv2d: bias must be [1," + std::to_string(out_channels) + ",1,1], got " +
                     bias->shape().str());
  }
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride, long padding) {
  const long span = static_cast<long>(in) + 2 * padding - static_cast<long>(kernel);
  if (span < 0) {
    throw ShapeError("conv2d: non-positive output extent (input " + std::to_string(in) + ", kernel " +
                     std::to_string(kernel) + ", padding " + std::to_string(padding) + ")");
  }
  return static_cast<std::size_t>(span) / stride + 1;
}

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::size_t stride, long padding,
                         const Tensor<T>* bias) {
  const Shape& in = input.shape();
  const Shape& ws = weights.shape();
  const Geometry g = check_geometry<T>(in, ws, stride, padding);
  check_bias(bias, ws.n);

  Tensor<T> out(Shape{in.n, ws.n, g.out_h, g.out_w});
  std::vector<T> col(g.is_pointwise() ? 0 : g.rows() * g.cols());
  ConstMapMat<T> wm(weights.raw(), ws.n, g.rows());
  for (std::size_t n = 0; n < in.n; ++n) {
    const T* xn = input.raw() + n * in.c * in.h * in.w;
    const T* cp = xn;
    if (!g.is_pointwise()) {
      im2col(xn, g, col.data());
      cp = col.data();
    }
    ConstMapMat<T> cm(cp, g.rows(), g.cols());
    MapMat<T> om(out.raw() + n * ws.n * g.cols(), ws.n, g.cols());
    om.noalias() = wm * cm;
    if (bias) {
      for (std::size_t o = 0; o < ws.n; ++o) om.row(o).array() += (*bias)[o];
    }
  }
  return out;
}

template <class T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvSpec<T>& spec) {
  const Shape& ws = spec.weights.shape();
  if (input.shape().c != spec.in_channels) {
    throw ShapeError("conv2d: shape mismatch on axis C (input has " + std::to_string(input.shape().c) +
                     " channels, spec expects " + std::to_string(spec.in_channels) + ")");
  }
  if (!(ws == Shape{spec.out_channels, spec.in_channels, spec.geometry.kernel, spec.geometry.kernel})) {
    throw ShapeError("conv2d: weights " + ws.str() + " inconsistent with spec channels/kernel");
  }
  return conv2d_forward(input, spec.weights, spec.geometry.stride, static_cast<long>(spec.geometry.padding),
                        spec.bias ? &*spec.bias : nullptr);
}

template <class T>
Var<T> conv2d_signed(Var<T> input, Var<T> weights, std::size_t stride, long padding) {
  Tensor<T> out = conv2d_forward(input.value(), weights.value(), stride, padding);
  return input.tape().record(std::move(out), {input, weights},
                             [input, weights, stride, padding](const Tensor<T>& gy, GradSink<T>& sink) {
    const Tensor<T>& x = input.value();
    const Tensor<T>& w = weights.value();
    const Shape& in = x.shape();
    const Shape& ws = w.shape();
    const Geometry g = check_geometry<T>(in, ws, stride, padding);
    const bool want_x = sink.wants(input);
    const bool want_w = sink.wants(weights);
    std::vector<T> col(g.rows() * g.cols());
    ConstMapMat<T> wm(w.raw(), ws.n, g.rows());
    Tensor<T>* dw = want_w ? &sink.buffer(weights) : nullptr;
    Tensor<T>* dx = want_x ? &sink.buffer(input) : nullptr;
    for (std::size_t n = 0; n < in.n; ++n) {
      const T* xn = x.raw() + n * in.c * in.h * in.w;
      ConstMapMat<T> gm(gy.raw() + n * ws.n * g.cols(), ws.n, g.cols());
      if (want_w) {
        const T* cp = xn;
        if (!g.is_pointwise()) {
          im2col(xn, g, col.data());
          cp = col.data();
        }
        ConstMapMat<T> cm(cp, g.rows(), g.cols());
        MapMat<T> dwm(dw->raw(), ws.n, g.rows());
        dwm.noalias() += gm * cm.transpose();
      }
      if (want_x) {
        T* dxn = dx->raw() + n * in.c * in.h * in.w;
        if (g.is_pointwise()) {
          MapMat<T> dxm(dxn, g.rows(), g.cols());
          dxm.noalias() += wm.transpose() * gm;
        } else {
          MapMat<T> dcm(col.data(), g.rows(), g.cols());
          dcm.noalias() = wm.transpose() * gm;
          col2im_add(col.data(), g, dxn);
        }
      }
    }
  });
}

template <class T>
Var<T> conv2d(Var<T> input, Var<T> weights, const ConvGeometry& geometry,
              std::optional<std::type_identity_t<Var<T>>> bias) {
  Var<T> y = conv2d_signed(input, weights, geometry.stride, static_cast<long>(geometry.padding));
  if (!bias) return y;
  const std::size_t channels = weights.shape().n;
  check_bias(&bias->value(), channels);
  Tensor<T> out = y.value();
  const Shape s = out.shape();
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c) {
      const T b = bias->value()[c];
      T* p = out.raw() + (n * s.c + c) * s.plane();
      for (std::size_t i = 0; i < s.plane(); ++i) p[i] += b;
    }
  Var<T> bv = *bias;
  return input.tape().record(std::move(out), {y, bv}, [y, bv](const Tensor<T>& gy, GradSink<T>& sink) {
    sink.add(y, gy);
    if (sink.wants(bv)) {
      const Shape s = gy.shape();
      Tensor<T>& db = sink.buffer(bv);
      for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
          const T* p = gy.raw() + (n * s.c + c) * s.plane();
          T acc = 0;
          for (std::size_t i = 0; i < s.plane(); ++i) acc += p[i];
          db[c] += acc;
        }
    }
  });
}

template Tensor<float> conv2d_forward(const Tensor<float>&, const Tensor<float>&, std::size_t, long,
                                      const Tensor<float>*);
template Tensor<double> conv2d_forward(const Tensor<double>&, const Tensor<double>&, std::size_t, long,
                                       const Tensor<double>*);
template Tensor<float> conv2d(const Tensor<float>&, const ConvSpec<float>&);
template Tensor<double> conv2d(const Tensor<double>&, const ConvSpec<double>&);
template Var<float> conv2d_signed(Var<float>, Var<float>, std::size_t, long);
template Var<double> conv2d_signed(Var<double>, Var<double>, std::size_t, long);
template Var<float> conv2d(Var<float>, Var<float>, const ConvGeometry&, std::optional<Var<float>>);
template Var<double> conv2d(Var<double>, Var<double>, const ConvGeometry&, std::optional<Var<double>>);

}  // namespace cdcnet
