#pragma once

#include "cdcnet/tensor/ops.hpp"

namespace cdcnet {

/// Mean squared difference over every element.
template <class T>
Var<T> loss_mse(Var<T> pred, Var<T> target);

/// Eight 3x3 kernels, [8,1,3,3]: -1 at the centre and +1 at one neighbour,
/// neighbours in row-major order skipping the centre.
template <class T>
Tensor<T> contrast_kernel_bank();

/// (1/8) sum_i mean((K_i * pred - K_i * target)^2) over the valid region.
/// Depth maps must be single-channel with spatial extent >= 3.
template <class T>
Var<T> loss_cdl(Var<T> pred, Var<T> target);

/// loss_mse + loss_cdl.
template <class T>
Var<T> loss_overall(Var<T> pred, Var<T> target);

}  // namespace cdcnet
