#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdcnet/nets/layers.hpp"

namespace cdcnet {

enum class OpKind { none, skip_connect, cdc_single, cdc_stack };

/// One candidate operation on a cell edge. Every op maps C channels to C
/// channels at unchanged spatial extent.
struct OpSpec {
  OpKind kind = OpKind::none;
  double ratio = 1.0;  // cdc_stack: hidden width = round(ratio * C)
  double theta = kDefaultTheta;

  /// "none", "skip_connect", "cdc_single", "cdc_2_<ratio>".
  std::string name() const;
  /// Inverse of name(); theta is always the default. Throws ConfigError.
  static OpSpec parse(const std::string& name);
  bool operator==(const OpSpec&) const = default;
};

using OpCatalog = std::vector<OpSpec>;

/// none, skip_connect, cdc_single, cdc_2_{0.5,1,2,4,8}.
OpCatalog default_catalog();

/// Names unique and parseable; `none` and `skip_connect` present. When
/// `standard` is set the catalog must hold exactly eight entries.
void validate_catalog(const OpCatalog& catalog, bool standard);

/// Index of `name` in the catalog, or throws ConfigError.
std::size_t catalog_index(const OpCatalog& catalog, const std::string& name);

template <class T>
class CandidateOp {
 public:
  CandidateOp(const std::string& name, const OpSpec& spec, std::size_t channels);

  /// std::nullopt for `none`, which contributes nothing.
  std::optional<Var<T>> forward(Tape<T>& tape, Var<T> x, Mode mode);
  void init(Rng& rng);
  void collect(StateDict<T>& out);
  const OpSpec& spec() const { return spec_; }

 private:
  OpSpec spec_;
  std::vector<std::unique_ptr<CdcUnit<T>>> units_;
};

extern template class CandidateOp<float>;
extern template class CandidateOp<double>;

}  // namespace cdcnet
