#include "cdcnet/nets/model_io.hpp"

#include "json.hpp"

#include "cdcnet/nets/cdcnpp.hpp"

namespace cdcnet {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "cdcnet-model";

json theta_json(const ThetaMode& m) {
  if (const auto* f = std::get_if<FixedTheta>(&m)) return {{"mode", "fixed"}, {"theta", f->theta}};
  return {{"mode", "adaptive"}, {"initial_pre_theta", std::get<AdaptiveTheta>(m).initial_pre_theta}};
}

ThetaMode theta_from(const json& j) {
  const std::string mode = j.at("mode");
  if (mode == "fixed") return FixedTheta{j.at("theta").get<double>()};
  if (mode == "adaptive") return AdaptiveTheta{j.at("initial_pre_theta").get<double>()};
  throw DataError("model header: unknown theta mode '" + mode + "'");
}

}  // namespace

std::unique_ptr<DepthModel<float>> build_model(const ModelSpec& spec) {
  if (spec.kind == ModelSpec::Kind::cdcn) return std::make_unique<Cdcn<float>>(spec.cdcn);
  if (!spec.genotype) throw ConfigError("cdcn++ needs a genotype");
  return std::make_unique<CdcnPlusPlus<float>>(*spec.genotype, spec.backbone);
}

std::string model_header(const ModelSpec& spec) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = 1;
  if (spec.kind == ModelSpec::Kind::cdcn) {
    doc["model"] = "cdcn";
    doc["input_size"] = spec.cdcn.input_size;
    doc["channel_scale"] = spec.cdcn.channel_scale;
    doc["theta"] = theta_json(spec.cdcn.theta_mode);
    doc["use_mafm"] = spec.cdcn.use_mafm;
  } else {
    if (!spec.genotype) throw ConfigError("cdcn++ needs a genotype");
    const BackboneConfig& b = spec.backbone;
    doc["model"] = "cdcnpp";
    doc["input_size"] = b.input_size;
    doc["channel_scale"] = b.channel_scale;
    doc["width_multiplier"] = b.width_multiplier;
    doc["theta"] = theta_json(b.theta_mode);
    doc["use_mafm"] = b.use_mafm;
    doc["nodes"] = b.nodes;
    doc["base_plan"] = b.base_plan;
    doc["genotype"] = format_genotype(*spec.genotype);
  }
  return doc.dump();
}

ModelSpec parse_model_header(const std::string& header) {
  try {
    const json doc = json::parse(header);
    if (doc.at("format") != kFormat || doc.at("version") != 1) throw DataError("checkpoint header: not a cdcnet model");
    ModelSpec s;
    const std::string model = doc.at("model");
    if (model == "cdcn") {
      s.kind = ModelSpec::Kind::cdcn;
      s.cdcn.input_size = doc.at("input_size");
      s.cdcn.channel_scale = doc.at("channel_scale");
      s.cdcn.theta_mode = theta_from(doc.at("theta"));
      s.cdcn.use_mafm = doc.at("use_mafm");
    } else if (model == "cdcnpp") {
      s.kind = ModelSpec::Kind::cdcnpp;
      BackboneConfig& b = s.backbone;
      b.input_size = doc.at("input_size");
      b.channel_scale = doc.at("channel_scale");
      b.width_multiplier = doc.at("width_multiplier");
      b.theta_mode = theta_from(doc.at("theta"));
      b.use_mafm = doc.at("use_mafm");
      b.nodes = doc.at("nodes");
      b.base_plan = doc.at("base_plan").get<std::array<std::size_t, 7>>();
      s.genotype = parse_genotype(doc.at("genotype").get<std::string>());
    } else {
      throw DataError("checkpoint header: unknown model '" + model + "'");
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelSpec& spec, DepthModel<float>& model) {
  Checkpoint ck;
  ck.header = model_header(spec);
  store_state(model.state(), ck);
  write_checkpoint(path, ck);
}

LoadedModel load_model(const std::string& path) {
  const Checkpoint ck = read_checkpoint(path);
  LoadedModel out;
  out.spec = parse_model_header(ck.header);
  try {
    out.model = build_model(out.spec);
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint header describes an invalid model: ") + e.what());
  }
  load_state(out.model->state(), ck);
  return out;
}

}  // namespace cdcnet
