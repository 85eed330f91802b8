#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cdcnet {

struct GradSuiteResult {
  std::string op;
  std::size_t trials = 0;
  double max_rel_error = 0;
  std::string worst;
  bool passed = false;
};

/// Central-difference checks in double precision for conv2d, CDC (fixed and
/// adaptive theta), batch norm, the primitive layers, MAFM, both losses and
/// the supernet architecture logits, `trials` random cases each.
std::vector<GradSuiteResult> run_gradcheck_suite(std::size_t trials = 20, std::uint64_t seed = 1,
                                                 double tolerance = 1e-4);

}  // namespace cdcnet
