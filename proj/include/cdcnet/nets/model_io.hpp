#pragma once

#include <memory>
#include <optional>
#include <string>

#include "cdcnet/nas/genotype.hpp"
#include "cdcnet/nets/backbone.hpp"
#include "cdcnet/nets/cdcn.hpp"

namespace cdcnet {

/// Everything needed to rebuild a trained network before loading weights.
struct ModelSpec {
  enum class Kind { cdcn, cdcnpp };
  Kind kind = Kind::cdcn;
  CdcnConfig cdcn;                   // kind == cdcn
  BackboneConfig backbone;           // kind == cdcnpp
  std::optional<Genotype> genotype;  // kind == cdcnpp

  std::size_t input_size() const { return kind == Kind::cdcn ? cdcn.input_size : backbone.input_size; }
};

std::unique_ptr<DepthModel<float>> build_model(const ModelSpec& spec);

/// JSON checkpoint header describing `spec`; the genotype is embedded in its
/// text form.
std::string model_header(const ModelSpec& spec);
ModelSpec parse_model_header(const std::string& header);

void save_model(const std::string& path, const ModelSpec& spec, DepthModel<float>& model);

struct LoadedModel {
  ModelSpec spec;
  std::unique_ptr<DepthModel<float>> model;
};
LoadedModel load_model(const std::string& path);

}  // namespace cdcnet
