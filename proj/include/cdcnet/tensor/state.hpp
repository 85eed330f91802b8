#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cdcnet/tensor/checkpoint.hpp"
#include "cdcnet/tensor/rng.hpp"
#include "cdcnet/tensor/tape.hpp"

namespace cdcnet {

/// Non-owning view of everything a model persists: trainable/frozen
/// parameters plus buffers such as batch-norm running statistics.
template <class T>
struct StateDict {
  std::vector<Parameter<T>*> params;
  std::vector<std::pair<std::string, Tensor<T>*>> buffers;

  std::vector<Parameter<T>*> trainable() const;
  std::size_t parameter_count() const;
};

/// Appends every parameter and buffer to the checkpoint under its name.
template <class T>
void store_state(const StateDict<T>& state, Checkpoint& ck);

/// Loads every parameter and buffer by name. Missing names and shape
/// mismatches raise DataError; extra checkpoint entries are ignored.
template <class T>
void load_state(const StateDict<T>& state, const Checkpoint& ck);

/// Kaiming-uniform (fan-in, ReLU gain) fill: U(-b, b), b = sqrt(6 / fan_in).
template <class T>
void kaiming_uniform(Tensor<T>& weights, Rng& rng);

extern template struct StateDict<float>;
extern template struct StateDict<double>;

}  // namespace cdcnet
