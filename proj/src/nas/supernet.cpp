#include "cdcnet/nas/supernet.hpp"

namespace cdcnet {

SupernetConfig SupernetConfig::desk() {
  SupernetConfig c;
  c.backbone.input_size = 32;
  c.backbone.channel_scale = 1.0 / 16.0;
  c.backbone.use_mafm = false;
  return c;
}

namespace {

template <class T>
std::unique_ptr<ArchParams<T>> checked_arch(const SupernetConfig& config, std::unique_ptr<ArchParams<T>> arch) {
  validate_catalog(config.catalog, false);
  if (!arch) arch = std::make_unique<ArchParams<T>>(config.catalog.size(), config.backbone.nodes, config.sharing);
  if (arch->ops() != config.catalog.size() || arch->nodes() != config.backbone.nodes || arch->cells() != 3 ||
      arch->sharing() != config.sharing) {
    throw ConfigError("supernet: architecture parameters do not match the configuration");
  }
  return arch;
}

}  // namespace

template <class T>
Supernet<T>::Supernet(const SupernetConfig& config) : Supernet(config, nullptr) {}

template <class T>
Supernet<T>::Supernet(const SupernetConfig& config, std::unique_ptr<ArchParams<T>> arch)
    : detail::ArchOwner<T>{checked_arch<T>(config, std::move(arch))},
      Backbone<T>(config.backbone,
                  [this, &config](std::size_t k, std::size_t channels) -> std::unique_ptr<CellModule<T>> {
                    return std::make_unique<MixedCell<T>>(k, channels, config.catalog, arch_->cell(k),
                                                          config.node_attention);
                  }),
      config_(config) {}

template class Supernet<float>;
template class Supernet<double>;

}  // namespace cdcnet
