#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cdcnet/tensor/tensor.hpp"

namespace cdcnet {

/// A named, optionally trainable tensor owned by a layer.
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  bool trainable = true;
};

template <class T>
class Tape;

/// Handle to a value recorded on a tape. Cheap to copy; only valid while the
/// owning tape is alive.
template <class T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<T>& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

template <class T>
class GradSink;

/// Gradient of the loss with respect to every requires-grad value.
template <class T>
class Gradients {
 public:
  const Tensor<T>& of(Var<T> v) const;
  const Tensor<T>& of(const Parameter<T>& p) const;
  bool has(const Parameter<T>& p) const { return params_.count(&p) != 0; }

 private:
  friend class Tape<T>;
  std::vector<std::optional<Tensor<T>>> grads_;
  std::vector<Shape> shapes_;
  std::unordered_map<const Parameter<T>*, std::size_t> params_;
  const Tape<T>* tape_ = nullptr;
  mutable std::unordered_map<std::size_t, Tensor<T>> zero_cache_;
};

/// Records operations in execution order; backward() replays them in strict
/// reverse order, accumulating gradients additively across fan-out.
template <class T>
class Tape {
 public:
  using BackwardFn = std::function<void(const Tensor<T>& grad_out, GradSink<T>& sink)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  /// Constant input: never receives a gradient.
  Var<T> constant(Tensor<T> value);
  /// Leaf input whose gradient is tracked when value.requires_grad() is set.
  Var<T> leaf(Tensor<T> value);
  /// Registers a parameter; the same parameter always maps to the same Var.
  Var<T> watch(Parameter<T>& p);

  /// Appends an operation result. The node requires grad when any input does.
  Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn fn);

  const Tensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  /// Reverse-mode sweep from a scalar loss. Consumes the tape.
  Gradients<T> backward(Var<T> loss);

 private:
  struct Node {
    Tensor<T> value;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> params_;
  bool grad_enabled_;
  bool consumed_ = false;
};

/// Accumulator handed to backward functions.
template <class T>
class GradSink {
 public:
  GradSink(const Tape<T>& tape, std::vector<std::optional<Tensor<T>>>& grads)
      : tape_(tape), grads_(grads) {}

  bool wants(const Var<T>& v) const { return tape_.requires_grad(v.id()); }
  /// Adds g into the gradient buffer of v (no-op when v does not need grad).
  void add(const Var<T>& v, const Tensor<T>& g);
  void add(const Var<T>& v, Tensor<T>&& g);
  /// Mutable buffer for v, zero-initialised on first use.
  Tensor<T>& buffer(const Var<T>& v);

 private:
  const Tape<T>& tape_;
  std::vector<std::optional<Tensor<T>>>& grads_;
};

template <class T>
const Tensor<T>& Var<T>::value() const {
  return tape_->value(id_);
}

template <class T>
bool Var<T>::requires_grad() const {
  return tape_->requires_grad(id_);
}

extern template class Tape<float>;
extern template class Tape<double>;
extern template class Gradients<float>;
extern template class Gradients<double>;
extern template class GradSink<float>;
extern template class GradSink<double>;

}  // namespace cdcnet
