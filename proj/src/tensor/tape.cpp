#include "cdcnet/tensor/tape.hpp"

namespace cdcnet {

template <class T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  nodes_.push_back(Node{std::move(value), false, {}});
  return Var<T>(this, nodes_.size() - 1);
}

template <class T>
Var<T> Tape<T>::leaf(Tensor<T> value) {
  const bool rg = grad_enabled_ && value.requires_grad();
  nodes_.push_back(Node{std::move(value), rg, {}});
  return Var<T>(this, nodes_.size() - 1);
}

template <class T>
Var<T> Tape<T>::watch(Parameter<T>& p) {
  if (auto it = params_.find(&p); it != params_.end()) return Var<T>(this, it->second);
  const bool rg = grad_enabled_ && p.trainable;
  nodes_.push_back(Node{p.value, rg, {}});
  params_.emplace(&p, nodes_.size() - 1);
  return Var<T>(this, nodes_.size() - 1);
}

template <class T>
Var<T> Tape<T>::record(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn fn) {
  bool rg = false;
  if (grad_enabled_) {
    for (const auto& v : inputs) {
      if (&v.tape() != this) throw ShapeError("operation mixes values from different tapes");
      rg = rg || nodes_[v.id()].requires_grad;
    }
  }
  nodes_.push_back(Node{std::move(value), rg, rg ? std::move(fn) : BackwardFn{}});
  return Var<T>(this, nodes_.size() - 1);
}

template <class T>
Gradients<T> Tape<T>::backward(Var<T> loss) {
  if (!loss.valid() || &loss.tape() != this || loss.id() >= nodes_.size()) {
    throw ShapeError("backward: loss tensor is not on this tape");
  }
  if (consumed_) throw ShapeError("backward: tape already consumed");
  const Shape& ls = nodes_[loss.id()].value.shape();
  if (ls.numel() != 1) throw ShapeError("backward: loss must be scalar [1,1,1,1], got " + ls.str());

  Gradients<T> out;
  out.grads_.resize(nodes_.size());
  out.shapes_.reserve(nodes_.size());
  for (const auto& n : nodes_) out.shapes_.push_back(n.value.shape());
  out.params_ = params_;
  out.tape_ = this;

  GradSink<T> sink(*this, out.grads_);
  if (nodes_[loss.id()].requires_grad) {
    out.grads_[loss.id()] = Tensor<T>::scalar(T(1));
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& node = nodes_[i];
      if (!node.backward || !out.grads_[i]) continue;
      node.backward(*out.grads_[i], sink);
      node.backward = {};
      // Interior gradients are released once propagated; leaves keep theirs.
      if (i != loss.id()) out.grads_[i].reset();
    }
  }
  consumed_ = true;
  return out;
}

template <class T>
const Tensor<T>& Gradients<T>::of(Var<T> v) const {
  if (v.id() >= grads_.size() || &v.tape() != tape_) throw ShapeError("gradient requested for value not on tape");
  if (grads_[v.id()]) return *grads_[v.id()];
  auto [it, inserted] = zero_cache_.try_emplace(v.id(), Tensor<T>(shapes_[v.id()]));
  return it->second;
}

template <class T>
const Tensor<T>& Gradients<T>::of(const Parameter<T>& p) const {
  auto it = params_.find(&p);
  if (it == params_.end()) throw ShapeError("gradient requested for parameter '" + p.name + "' not on tape");
  const std::size_t id = it->second;
  if (grads_[id]) return *grads_[id];
  auto [z, inserted] = zero_cache_.try_emplace(id, Tensor<T>(shapes_[id]));
  return z->second;
}

template <class T>
Tensor<T>& GradSink<T>::buffer(const Var<T>& v) {
  auto& slot = grads_[v.id()];
  if (!slot) slot.emplace(tape_.value(v.id()).shape());
  return *slot;
}

template <class T>
void GradSink<T>::add(const Var<T>& v, const Tensor<T>& g) {
  if (!wants(v)) return;
  require_same_shape(g.shape(), tape_.value(v.id()).shape(), "gradient accumulation");
  auto& slot = grads_[v.id()];
  if (!slot) slot.emplace(g);
  else *slot += g;
}

template <class T>
void GradSink<T>::add(const Var<T>& v, Tensor<T>&& g) {
  if (!wants(v)) return;
  require_same_shape(g.shape(), tape_.value(v.id()).shape(), "gradient accumulation");
  auto& slot = grads_[v.id()];
  if (!slot) slot.emplace(std::move(g));
  else *slot += g;
}

template class Tape<float>;
template class Tape<double>;
template class Gradients<float>;
template class Gradients<double>;
template class GradSink<float>;
template class GradSink<double>;

}  // namespace cdcnet
