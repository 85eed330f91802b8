#include "cdcnet/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cdcnet {

GradCheckReport finite_difference_check(const LossBuilder& build, const std::vector<Parameter<double>*>& targets,
                                        const GradCheckOptions& options) {
  std::vector<Tensor<double>> analytic;
  {
    Tape<double> tape;
    for (auto* p : targets) tape.watch(*p);
    Var<double> loss = build(tape);
    const Gradients<double> grads = tape.backward(loss);
    for (auto* p : targets) analytic.push_back(grads.of(*p));
  }

  auto evaluate = [&]() {
    Tape<double> tape(false);
    return build(tape).value().item();
  };

  Rng rng(options.seed);
  GradCheckReport report;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    Parameter<double>& p = *targets[k];
    std::vector<std::size_t> coords(p.value.numel());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_param != 0 && coords.size() > options.max_coords_per_param) {
      for (std::size_t i = 0; i < options.max_coords_per_param; ++i) {
        std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
      }
      coords.resize(options.max_coords_per_param);
    }
    for (std::size_t idx : coords) {
      const double original = p.value[idx];
      p.value[idx] = original + options.step;
      const double up = evaluate();
      p.value[idx] = original - options.step;
      const double down = evaluate();
      p.value[idx] = original;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[k][idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_rel_error || !std::isfinite(rel)) {
        report.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
        std::ostringstream os;
        os << p.name << '[' << idx << "]: analytic " << a << " vs numeric " << numeric;
        report.worst = os.str();
      }
    }
  }
  return report;
}

}  // namespace cdcnet
