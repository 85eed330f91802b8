#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cdcnet/tensor/rng.hpp"
#include "cdcnet/tensor/tape.hpp"

namespace cdcnet {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "<param>[index]: analytic vs numeric"
};

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor for |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  /// 0 = every coordinate, otherwise a random sample of this many per parameter.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 7;
};

/// Builds the scalar loss on the given tape, reading targets through
/// tape.watch(). Must be a pure function of the target values.
using LossBuilder = std::function<Var<double>(Tape<double>&)>;

/// Compares reverse-mode gradients of `build` against central differences
/// for every (sampled) coordinate of every target.
GradCheckReport finite_difference_check(const LossBuilder& build, const std::vector<Parameter<double>*>& targets,
                                        const GradCheckOptions& options = {});

}  // namespace cdcnet
