#pragma once

#include "cdcnet/nas/cells.hpp"

namespace cdcnet {

/// Searched network: the backbone with one discrete cell per genotype cell
/// and MAFM fusion. The default config doubles the search width.
template <class T>
class CdcnPlusPlus final : public Backbone<T> {
 public:
  CdcnPlusPlus(const Genotype& genotype, const BackboneConfig& config = default_config());

  /// Width multiplier 2, MAFM on.
  static BackboneConfig default_config();
  const Genotype& genotype() const { return genotype_; }

 private:
  Genotype genotype_;
};

extern template class CdcnPlusPlus<float>;
extern template class CdcnPlusPlus<double>;

}  // namespace cdcnet
