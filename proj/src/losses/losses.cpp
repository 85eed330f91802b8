#include "cdcnet/losses/losses.hpp"

namespace cdcnet {

namespace {

template <class T>
Var<T> mean_square(Var<T> d) {
  const Tensor<T>& v = d.value();
  T acc = 0;
  for (T x : v.data()) acc += x * x;
  const T count = static_cast<T>(v.numel());
  return d.tape().record(Tensor<T>::scalar(acc / count), {d}, [d, count](const Tensor<T>& g, GradSink<T>& sink) {
    const Tensor<T>& v = d.value();
    Tensor<T>& dd = sink.buffer(d);
    const T k = T(2) * g[0] / count;
    for (std::size_t i = 0; i < v.numel(); ++i) dd[i] += k * v[i];
  });
}

}  // namespace

template <class T>
Var<T> loss_mse(Var<T> pred, Var<T> target) {
  require_same_shape(pred.shape(), target.shape(), "loss_mse");
  return mean_square(sub(pred, target));
}

template <class T>
Tensor<T> contrast_kernel_bank() {
  Tensor<T> bank(Shape{8, 1, 3, 3});
  std::size_t k = 0;
  for (std::size_t pos = 0; pos < 9; ++pos) {
    if (pos == 4) continue;
    bank[k * 9 + 4] = T(-1);
    bank[k * 9 + pos] = T(1);
    ++k;
  }
  return bank;
}

template <class T>
Var<T> loss_cdl(Var<T> pred, Var<T> target) {
  require_same_shape(pred.shape(), target.shape(), "loss_cdl");
  const Shape s = pred.shape();
  if (s.c != 1) throw ShapeError("loss_cdl: depth maps must have one channel, got " + s.str());
  if (s.h < 3 || s.w < 3) throw ShapeError("loss_cdl: spatial extent must be at least 3, got " + s.str());
  Var<T> bank = pred.tape().constant(contrast_kernel_bank<T>());
  return mean_square(conv2d(sub(pred, target), bank, ConvGeometry{3, 1, 0}));
}

template <class T>
Var<T> loss_overall(Var<T> pred, Var<T> target) {
  return add(loss_mse(pred, target), loss_cdl(pred, target));
}

template Var<float> loss_mse(Var<float>, Var<float>);
template Var<double> loss_mse(Var<double>, Var<double>);
template Tensor<float> contrast_kernel_bank();
template Tensor<double> contrast_kernel_bank();
template Var<float> loss_cdl(Var<float>, Var<float>);
template Var<double> loss_cdl(Var<double>, Var<double>);
template Var<float> loss_overall(Var<float>, Var<float>);
template Var<double> loss_overall(Var<double>, Var<double>);

}  // namespace cdcnet
