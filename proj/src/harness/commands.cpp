#include "cdcnet/harness/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "cdcnet/data/manifest.hpp"
#include "cdcnet/data/pnm.hpp"
#include "cdcnet/harness/gradsuite.hpp"
#include "cdcnet/harness/train.hpp"
#include "cdcnet/nas/search.hpp"
#include "cdcnet/nets/model_io.hpp"

namespace cdcnet {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gen", "train", "search", "derive", "eval", "gradcheck", "infer"};
  return names;
}

int exit_code(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err) return 1;
  switch (err->kind()) {
    case ErrorKind::config: return 2;
    case ErrorKind::data:
    case ErrorKind::shape: return 3;
    case ErrorKind::numeric: return 4;
    case ErrorKind::io: return 5;
  }
  return 1;
}

std::string error_line(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  std::string msg = e.what();
  for (char& c : msg)
    if (c == '\n' || c == '\r') c = ' ';
  return std::string("error[") + (err ? error_kind_name(err->kind()) : "internal") + "]: " + msg;
}

namespace {

struct Run {
  const RunConfig& cfg;
  std::ostream& out;
  bool json;
  fs::path dir;

  fs::path path(const std::string& name) const { return dir / name; }

  void emit(const nlohmann::json& j, const std::string& human) const {
    if (json) out << j.dump() << "\n";
    else out << human << "\n";
  }

  std::string required(const std::string& key) const {
    const std::string& v = cfg.str(key);
    if (v.empty()) throw ConfigError("this command needs '" + key + "'");
    return v;
  }
};

void write_text(const fs::path& p, const std::string& text) {
  write_file(p.string(), std::vector<unsigned char>(text.begin(), text.end()));
}

ThetaMode theta_mode(const RunConfig& c) {
  const std::string& m = c.str("theta_mode");
  if (m == "fixed") {
    const double t = c.num("theta");
    if (t < 0 || t > 1) throw ConfigError("theta must lie in [0, 1]");
    return FixedTheta{t};
  }
  if (m == "adaptive") return AdaptiveTheta{};
  throw ConfigError("theta_mode must be fixed or adaptive, got '" + m + "'");
}

BackboneConfig backbone_config(const RunConfig& c) {
  BackboneConfig b;
  b.input_size = c.count("input_size");
  b.channel_scale = c.num("channel_scale");
  b.width_multiplier = c.num("width_multiplier");
  b.theta_mode = theta_mode(c);
  b.use_mafm = c.flag("mafm");
  b.nodes = c.count("nodes");
  b.validate();
  return b;
}

ModelSpec model_spec(const Run& r) {
  const RunConfig& c = r.cfg;
  ModelSpec s;
  const std::string& model = c.str("model");
  if (model == "cdcn") {
    s.kind = ModelSpec::Kind::cdcn;
    s.cdcn.input_size = c.count("input_size");
    s.cdcn.channel_scale = c.num("channel_scale");
    s.cdcn.theta_mode = theta_mode(c);
    s.cdcn.use_mafm = c.flag("mafm");
    s.cdcn.validate();
  } else if (model == "cdcnpp") {
    s.kind = ModelSpec::Kind::cdcnpp;
    s.backbone = backbone_config(c);
    s.genotype = read_genotype(r.required("genotype"));
  } else {
    throw ConfigError("model must be cdcn or cdcnpp, got '" + model + "'");
  }
  return s;
}

SynthConfig synth_config(const RunConfig& c) {
  SynthConfig s;
  s.seed = c.count("seed");
  s.live_count = c.count("live_count");
  s.attack_count = c.count("attack_count");
  s.image_size = c.count("image_size");
  s.attacks.clear();
  for (const auto& a : c.list("attacks")) s.attacks.push_back(parse_attack(a));
  s.domain_tag = c.str("domain_tag");
  if (s.domain_tag.find_first_of(",\n") != std::string::npos) throw ConfigError("domain_tag may not contain commas");
  s.domain.brightness = c.num("brightness");
  s.domain.brightness_spread = c.num("brightness_spread");
  s.domain.noise_sigma = c.num("noise_sigma");
  s.domain.noise_spread = c.num("noise_spread");
  const auto gains = c.list("color_gain");
  if (gains.size() != 3) throw ConfigError("color_gain needs three values");
  for (std::size_t i = 0; i < 3; ++i) {
    char* end = nullptr;
    s.domain.color_gain[i] = std::strtod(gains[i].c_str(), &end);
    if (*end != '\0' || !(s.domain.color_gain[i] > 0)) throw ConfigError("color_gain: '" + gains[i] + "' is not a positive number");
  }
  s.lattice_period = c.count("lattice_period");
  s.skin_grain = c.num("skin_grain");
  s.media_tone = c.num("media_tone");
  s.validate();
  return s;
}

std::vector<Sample> load_split(const Run& r, const std::string& key) { return read_dataset(r.required(key)); }

void cmd_gen(const Run& r) {
  const SynthConfig s = synth_config(r.cfg);
  const auto samples = generate(s);
  write_dataset(samples, r.dir.string());
  std::size_t live = 0;
  for (const auto& x : samples) live += x.live;
  std::ostringstream h;
  h << "wrote " << samples.size() << " samples (" << live << " live, " << samples.size() - live << " attack) to "
    << r.path("manifest.csv").string();
  r.emit({{"command", "gen"}, {"samples", samples.size()}, {"live", live}, {"manifest", r.path("manifest.csv").string()}},
         h.str());
}

void cmd_train(const Run& r) {
  const ModelSpec spec = model_spec(r);
  auto model = build_model(spec);
  Rng rng(r.cfg.count("seed"));
  model->init(rng);
  TrainConfig tc;
  tc.epochs = r.cfg.count("epochs");
  tc.batch_size = r.cfg.count("batch_size");
  tc.lr = r.cfg.num("lr");
  tc.weight_decay = r.cfg.num("weight_decay");
  tc.lr_halving = r.cfg.count("lr_halving");
  tc.seed = r.cfg.count("seed");
  std::ostringstream csv;
  csv << "epoch,train_loss,lr\n";
  if (tc.epochs > 0) {
    const auto train = load_split(r, "train_manifest");
    train_model(*model, train, tc, [&](const EpochLog& l) {
      csv << l.epoch << "," << format_double(l.train_loss) << "," << format_double(l.lr) << "\n";
      std::ostringstream h;
      h << "epoch " << l.epoch << "  loss " << std::setprecision(6) << l.train_loss << "  lr " << l.lr;
      r.emit({{"command", "train"}, {"epoch", l.epoch}, {"train_loss", l.train_loss}, {"lr", l.lr}}, h.str());
    });
  }
  save_model(r.path("model.ckpt").string(), spec, *model);
  write_text(r.path("loss.csv"), csv.str());
  r.emit({{"command", "train"}, {"checkpoint", r.path("model.ckpt").string()}},
         "checkpoint written to " + r.path("model.ckpt").string());
}

void cmd_search(const Run& r) {
  SupernetConfig sc;
  sc.backbone = backbone_config(r.cfg);
  sc.sharing = parse_sharing(r.cfg.str("sharing"));
  sc.node_attention = r.cfg.flag("node_attention");
  Supernet<float> net(sc);
  Rng rng(r.cfg.count("seed"));
  net.init(rng);
  SearchConfig cfg;
  cfg.epochs = r.cfg.count("epochs");
  cfg.batch_size = r.cfg.count("batch_size");
  cfg.weight_lr = r.cfg.num("lr");
  cfg.weight_decay = r.cfg.num("weight_decay");
  cfg.arch_lr = r.cfg.num("arch_lr");
  cfg.arch_weight_decay = r.cfg.num("arch_weight_decay");
  cfg.warmup = r.cfg.count("warmup");
  cfg.seed = r.cfg.count("seed");
  std::vector<SearchEpoch> trace;
  if (cfg.epochs > 0) {
    const auto train = load_split(r, "train_manifest"), val = load_split(r, "val_manifest");
    Searcher searcher(net, cfg);
    trace = searcher.run(train, val, [&](const SearchEpoch& e) {
      std::ostringstream h;
      h << "epoch " << e.epoch << "  train " << std::setprecision(6) << e.train_loss << "  val " << e.val_loss
        << (e.arch_updated ? "" : "  (warm-up)");
      r.emit({{"command", "search"}, {"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss},
              {"entropy", e.entropy}, {"arch_updated", e.arch_updated}},
             h.str());
    });
  }
  write_text(r.path("trace.csv"), format_trace_csv(trace));
  write_arch(r.path("arch.json").string(), net.arch(), sc.catalog);
  r.emit({{"command", "search"}, {"arch", r.path("arch.json").string()}, {"trace", r.path("trace.csv").string()}},
         "architecture parameters written to " + r.path("arch.json").string());
}

void cmd_derive(const Run& r) {
  OpCatalog catalog;
  const auto arch = read_arch(r.required("arch"), catalog);
  const Genotype g = derive_genotype(*arch, catalog, r.cfg.flag("node_attention"));
  write_genotype(g, r.path("genotype.txt").string());
  r.emit({{"command", "derive"}, {"genotype", format_genotype(g)}, {"path", r.path("genotype.txt").string()}},
         format_genotype(g) + "written to " + r.path("genotype.txt").string());
}

ScoreSet score_split(DepthModel<float>& model, const std::vector<Sample>& samples) {
  return make_score_set(samples, score_samples(model, samples));
}

void cmd_eval(const Run& r) {
  const std::string mode = r.cfg.str("metric_mode");
  if (mode != "dev-eer" && mode != "fixed-threshold") {
    throw ConfigError("metric_mode must be fixed-threshold or dev-eer, got '" + mode + "'");
  }
  ScoreSet test, dev;
  const bool need_dev = mode == "dev-eer";
  if (!r.cfg.str("scores").empty()) {
    test = read_scores_csv(r.cfg.str("scores"));
    if (need_dev) dev = read_scores_csv(r.required("dev_scores"));
  } else {
    auto loaded = load_model(r.required("checkpoint"));
    test = score_split(*loaded.model, load_split(r, "test_manifest"));
    write_scores_csv(test, r.path("test_scores.csv").string());
    if (need_dev) {
      dev = score_split(*loaded.model, load_split(r, "dev_manifest"));
      write_scores_csv(dev, r.path("dev_scores.csv").string());
    }
  }
  test.validate();
  if (need_dev) dev.validate();
  const double threshold = need_dev ? eer(dev).threshold : r.cfg.num("threshold");
  const EvalReport rep = evaluate_at(test, threshold);
  const std::pair<const char*, double> rows[] = {
      {"threshold", rep.threshold}, {"apcer", rep.rates.apcer}, {"bpcer", rep.rates.bpcer},
      {"acer", rep.rates.acer},     {"eer", rep.test_eer.eer},  {"hter", rep.hter},
      {"auc", rep.auc},
  };
  std::ostringstream csv, h;
  csv << "metric,value\n";
  json j = {{"command", "eval"}, {"metric_mode", mode}};
  h << "metric      value   (" << mode << ")\n";
  for (const auto& [k, v] : rows) {
    csv << k << "," << format_double(v) << "\n";
    j[k] = v;
    h << std::left << std::setw(10) << k << "  " << std::fixed << std::setprecision(4) << v << "\n";
  }
  for (std::size_t t = 0; t < test.attack_types.size(); ++t) {
    const std::string key = "apcer:" + test.attack_types[t];
    csv << key << "," << format_double(rep.rates.apcer_per_type[t]) << "\n";
    j[key] = rep.rates.apcer_per_type[t];
    h << "  " << std::left << std::setw(8) << test.attack_types[t] << std::fixed << std::setprecision(4)
      << rep.rates.apcer_per_type[t] << "\n";
  }
  write_text(r.path("metrics.csv"), csv.str());
  std::string human = h.str();
  human.pop_back();
  r.emit(j, human);
}

void cmd_gradcheck(const Run& r) {
  const std::size_t trials = r.cfg.count("gradcheck_trials");
  const double tol = r.cfg.num("gradcheck_tolerance");
  if (trials == 0) throw ConfigError("gradcheck_trials must be at least 1");
  const auto results = run_gradcheck_suite(trials, r.cfg.count("seed"), tol);
  std::ostringstream csv;
  csv << "op,trials,max_rel_error,passed\n";
  std::size_t failed = 0;
  for (const auto& res : results) {
    csv << res.op << "," << res.trials << "," << format_double(res.max_rel_error) << "," << (res.passed ? 1 : 0) << "\n";
    failed += !res.passed;
    std::ostringstream h;
    h << (res.passed ? "ok    " : "FAIL  ") << std::left << std::setw(20) << res.op << std::scientific
      << std::setprecision(2) << res.max_rel_error;
    if (!res.passed) h << "  " << res.worst;
    r.emit({{"command", "gradcheck"}, {"op", res.op}, {"trials", res.trials}, {"max_rel_error", res.max_rel_error},
            {"passed", res.passed}},
           h.str());
  }
  write_text(r.path("gradcheck.csv"), csv.str());
  if (failed) throw NumericError(std::to_string(failed) + " gradient check(s) exceeded tolerance " + format_double(tol));
}

void cmd_infer(const Run& r) {
  auto loaded = load_model(r.required("checkpoint"));
  const auto samples = load_split(r, "test_manifest");
  std::error_code ec;
  fs::create_directories(r.path("depth"), ec);
  if (ec) throw IoError("cannot create '" + r.path("depth").string() + "': " + ec.message());
  ScoreSet scores;
  for (const Sample& s : samples) {
    const Tensor<float> depth = loaded.model->predict(s.image);
    const double score = depth_scores(depth).front();
    if (s.live) scores.add_live(s.sample_id, score);
    else scores.add_attack(s.sample_id, score, s.attack);
    save_pgm(depth, r.path("depth").append(s.sample_id + ".pgm").string());
  }
  write_scores_csv(scores, r.path("scores.csv").string());
  r.emit({{"command", "infer"}, {"samples", samples.size()}, {"scores", r.path("scores.csv").string()}},
         "scored " + std::to_string(samples.size()) + " samples into " + r.path("scores.csv").string());
}

}  // namespace

void run_command(const std::string& name, const RunConfig& config, std::ostream& out, bool json) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) throw ConfigError("unknown command '" + name + "'");
  const RunConfig cfg = config.resolved(name);
  Run r{cfg, out, json, fs::path(cfg.str("output_dir"))};
  std::error_code ec;
  fs::create_directories(r.dir, ec);
  if (ec) throw IoError("cannot create output directory '" + r.dir.string() + "': " + ec.message());
  write_text(r.path("resolved_config.txt"), "# " + name + "\n" + cfg.format());
  if (name == "gen") cmd_gen(r);
  else if (name == "train") cmd_train(r);
  else if (name == "search") cmd_search(r);
  else if (name == "derive") cmd_derive(r);
  else if (name == "eval") cmd_eval(r);
  else if (name == "gradcheck") cmd_gradcheck(r);
  else cmd_infer(r);
}

}  // namespace cdcnet
