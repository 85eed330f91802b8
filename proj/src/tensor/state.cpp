#include "cdcnet/tensor/state.hpp"

#include <cmath>

namespace cdcnet {

template <class T>
std::vector<Parameter<T>*> StateDict<T>::trainable() const {
  std::vector<Parameter<T>*> out;
  for (auto* p : params)
    if (p->trainable) out.push_back(p);
  return out;
}

template <class T>
std::size_t StateDict<T>::parameter_count() const {
  std::size_t total = 0;
  for (auto* p : params)
    if (p->trainable) total += p->value.numel();
  return total;
}

template <class T>
void store_state(const StateDict<T>& state, Checkpoint& ck) {
  for (const auto* p : state.params) ck.put(p->name, p->value);
  for (const auto& [name, t] : state.buffers) ck.put(name, *t);
}

namespace {

template <class T>
void load_one(const std::string& name, Tensor<T>& dst, const Checkpoint& ck) {
  const CheckpointEntry* e = ck.find(name);
  if (!e) throw DataError("checkpoint is missing tensor '" + name + "'");
  if (!(e->shape() == dst.shape())) {
    throw DataError("checkpoint tensor '" + name + "' has shape " + e->shape().str() + ", model expects " +
                    dst.shape().str());
  }
  dst = e->as<T>();
}

}  // namespace

template <class T>
void load_state(const StateDict<T>& state, const Checkpoint& ck) {
  for (auto* p : state.params) load_one(p->name, p->value, ck);
  for (const auto& [name, t] : state.buffers) load_one(name, *t, ck);
}

template <class T>
void kaiming_uniform(Tensor<T>& weights, Rng& rng) {
  const Shape s = weights.shape();
  const double fan_in = static_cast<double>(s.c * s.h * s.w);
  const double bound = std::sqrt(6.0 / std::max(fan_in, 1.0));
  for (auto& v : weights.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

template struct StateDict<float>;
template struct StateDict<double>;
template void store_state(const StateDict<float>&, Checkpoint&);
template void store_state(const StateDict<double>&, Checkpoint&);
template void load_state(const StateDict<float>&, const Checkpoint&);
template void load_state(const StateDict<double>&, const Checkpoint&);
template void kaiming_uniform(Tensor<float>&, Rng&);
template void kaiming_uniform(Tensor<double>&, Rng&);

}  // namespace cdcnet
