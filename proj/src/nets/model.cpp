#include "cdcnet/nets/model.hpp"

#include <cmath>

namespace cdcnet {

template <class T>
Tensor<T> DepthModel<T>::predict(const Tensor<T>& images) {
  Tape<T> tape(false);
  return forward(tape, tape.constant(images), Mode::infer).value();
}

template <class T>
std::vector<double> depth_scores(const Tensor<T>& depth) {
  const Shape s = depth.shape();
  const std::size_t per = s.c * s.h * s.w;
  std::vector<double> out(s.n);
  for (std::size_t n = 0; n < s.n; ++n) {
    double acc = 0;
    for (std::size_t i = 0; i < per; ++i) acc += depth[n * per + i];
    out[n] = acc / static_cast<double>(per);
  }
  return out;
}

template <class T>
double infer_score(DepthModel<T>& model, const Tensor<T>& image) {
  if (image.shape().n != 1) throw ShapeError("infer_score expects a single image, got " + image.shape().str());
  return depth_scores(model.predict(image)).front();
}

std::size_t scaled_channels(std::size_t base, double factor, const char* what) {
  const long c = std::lround(static_cast<double>(base) * factor);
  if (c <= 0) {
    throw ConfigError(std::string(what) + " scales channel count " + std::to_string(base) + " to zero");
  }
  return static_cast<std::size_t>(c);
}

template class DepthModel<float>;
template class DepthModel<double>;
template std::vector<double> depth_scores(const Tensor<float>&);
template std::vector<double> depth_scores(const Tensor<double>&);
template double infer_score(DepthModel<float>&, const Tensor<float>&);
template double infer_score(DepthModel<double>&, const Tensor<double>&);

}  // namespace cdcnet
