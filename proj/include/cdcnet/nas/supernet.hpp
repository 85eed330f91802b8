#pragma once

#include <memory>

#include "cdcnet/nas/cells.hpp"

namespace cdcnet {

struct SupernetConfig {
  BackboneConfig backbone;
  OpCatalog catalog = default_catalog();
  Sharing sharing = Sharing::varied_cells;
  bool node_attention = true;

  /// Search preset: concat fusion, 1/16 width.
  static SupernetConfig desk();
};

namespace detail {
// Constructed before the Backbone base so the cell factory can bind to it.
template <class T>
struct ArchOwner {
  std::unique_ptr<ArchParams<T>> arch_;
};
}  // namespace detail

/// Backbone whose three cells are mixed cells over the catalog. Owns its
/// architecture parameters, which are not part of the weight state.
template <class T>
class Supernet final : private detail::ArchOwner<T>, public Backbone<T> {
 public:
  explicit Supernet(const SupernetConfig& config);
  Supernet(const SupernetConfig& config, std::unique_ptr<ArchParams<T>> arch);

  ArchParams<T>& arch() { return *arch_; }
  const ArchParams<T>& arch() const { return *arch_; }
  const SupernetConfig& config() const { return config_; }
  Genotype derive() const { return derive_genotype(*arch_, config_.catalog, config_.node_attention); }

 private:
  using detail::ArchOwner<T>::arch_;
  SupernetConfig config_;
};

extern template class Supernet<float>;
extern template class Supernet<double>;

}  // namespace cdcnet
