#include "cdcnet/nets/cdcnpp.hpp"

namespace cdcnet {

namespace {

const Genotype& checked(const Genotype& g, const BackboneConfig& config) {
  g.validate();
  if (g.cells.size() != 3) throw ConfigError("cdcn++: genotype must describe three cells");
  if (g.cells.front().nodes.size() != config.nodes) {
    throw ConfigError("cdcn++: genotype has " + std::to_string(g.cells.front().nodes.size()) +
                      " nodes per cell, config expects " + std::to_string(config.nodes));
  }
  return g;
}

}  // namespace

template <class T>
BackboneConfig CdcnPlusPlus<T>::default_config() {
  BackboneConfig c;
  c.width_multiplier = 2.0;
  c.use_mafm = true;
  return c;
}

template <class T>
CdcnPlusPlus<T>::CdcnPlusPlus(const Genotype& genotype, const BackboneConfig& config)
    : Backbone<T>(config,
                  [&](std::size_t k, std::size_t channels) -> std::unique_ptr<CellModule<T>> {
                    return std::make_unique<DiscreteCell<T>>(k, channels, checked(genotype, config).cells[k]);
                  }),
      genotype_(genotype) {}

template class CdcnPlusPlus<float>;
template class CdcnPlusPlus<double>;

}  // namespace cdcnet
