#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cdcnet/tensor/errors.hpp"

namespace cdcnet {

/// Extents of a 4-D tensor in [N, C, H, W] order.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t numel() const { return n * c * h * w; }
  constexpr std::size_t plane() const { return h * w; }
  constexpr bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// On-disk element kinds; the values are part of the checkpoint format.
enum class ElementKind : std::uint8_t { f32 = 0, f64 = 1 };

template <class T>
constexpr ElementKind element_kind_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? ElementKind::f32 : ElementKind::f64;
}

/// Dense row-major [N,C,H,W] array. Value-semantic; the shape is fixed at
/// construction and only replaced wholesale by assignment.
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.numel(), fill) {}
  Tensor(Shape shape, std::vector<T> data);

  static Tensor zeros(Shape shape) { return Tensor(shape); }
  static Tensor full(Shape shape, T value) { return Tensor(shape, value); }
  static Tensor scalar(T value) { return Tensor(Shape{1, 1, 1, 1}, value); }

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) { return data_[offset(n, c, h, w)]; }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[offset(n, c, h, w)];
  }

  /// Value of a single-element tensor.
  T item() const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  /// Elementwise in-place helpers used by optimizers and tests.
  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(T factor);

  template <class U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

 private:
  Shape shape_{};
  std::vector<T> data_;
  bool requires_grad_ = false;
};

/// Throws ShapeError naming the first axis on which the shapes disagree.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

template <class T>
T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
bool all_finite(const Tensor<T>& t);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace cdcnet
