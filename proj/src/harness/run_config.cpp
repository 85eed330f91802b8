#include "cdcnet/harness/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "cdcnet/data/pnm.hpp"

namespace cdcnet {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"preset", "desk | full: scale of every default below"},
      {"model", "cdcn | cdcnpp"},
      {"input_size", "network input extent in pixels"},
      {"channel_scale", "multiplier on the base channel widths"},
      {"width_multiplier", "extra width factor for cdcnpp and the supernet"},
      {"theta_mode", "fixed | adaptive"},
      {"theta", "theta of every CDC layer in fixed mode"},
      {"mafm", "on | off: attention fusion of the three levels"},
      {"genotype", "genotype file (cdcnpp)"},
      {"epochs", "training or search epochs"},
      {"batch_size", "mini-batch size"},
      {"lr", "weight learning rate"},
      {"weight_decay", "weight L2 decay"},
      {"lr_halving", "halve lr every this many epochs, 0 = epochs/2.6"},
      {"seed", "seed for initialisation and shuffling"},
      {"arch_lr", "architecture learning rate (search)"},
      {"arch_weight_decay", "architecture L2 decay (search)"},
      {"warmup", "search epochs with frozen architecture, 0 = epochs/6"},
      {"sharing", "varied_cells | shared_cells"},
      {"node_attention", "on | off"},
      {"nodes", "intermediate nodes per cell"},
      {"train_manifest", "training dataset manifest"},
      {"val_manifest", "validation manifest (search)"},
      {"dev_manifest", "development manifest (dev-eer threshold)"},
      {"test_manifest", "test or inference manifest"},
      {"checkpoint", "model checkpoint"},
      {"arch", "architecture parameter file (derive)"},
      {"scores", "test score CSV (eval)"},
      {"dev_scores", "development score CSV (eval)"},
      {"metric_mode", "fixed-threshold | dev-eer"},
      {"threshold", "decision threshold in fixed-threshold mode"},
      {"output_dir", "directory receiving every artifact"},
      {"live_count", "generated live samples"},
      {"attack_count", "generated samples per attack type"},
      {"image_size", "generated image extent"},
      {"attacks", "comma list of print_lattice, replay_moire"},
      {"domain_tag", "tag stored with generated samples"},
      {"brightness", "domain brightness offset"},
      {"brightness_spread", "per-sample brightness jitter half-width"},
      {"noise_sigma", "domain pixel noise"},
      {"noise_spread", "per-sample noise jitter half-width"},
      {"color_gain", "three comma-separated channel gains"},
      {"lattice_period", "print lattice pitch in pixels"},
      {"skin_grain", "relative amplitude of per-pixel skin grain"},
      {"media_tone", "largest tone offset of an attack medium"},
      {"gradcheck_trials", "random cases per checked operation"},
      {"gradcheck_tolerance", "maximum relative error"},
  };
  return keys;
}

namespace {

bool known(const std::string& key) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == key; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Defaults = std::map<std::string, std::string>;

Defaults preset_defaults(const std::string& preset, const std::string& command, const std::string& model) {
  if (preset != "desk" && preset != "full") throw ConfigError("preset must be desk or full, got '" + preset + "'");
  const bool desk = preset == "desk";
  const bool search = command == "search";
  Defaults d = {
      {"model", "cdcn"},
      {"theta_mode", "fixed"},
      {"theta", "0.7"},
      {"genotype", ""},
      {"weight_decay", "5e-05"},
      {"lr_halving", "0"},
      {"seed", "1"},
      {"arch_lr", "0.0006"},
      {"arch_weight_decay", "0.001"},
      {"warmup", "0"},
      {"sharing", "varied_cells"},
      {"node_attention", "on"},
      {"nodes", "4"},
      {"train_manifest", ""},
      {"val_manifest", ""},
      {"dev_manifest", ""},
      {"test_manifest", ""},
      {"checkpoint", ""},
      {"arch", ""},
      {"scores", ""},
      {"dev_scores", ""},
      {"metric_mode", "dev-eer"},
      {"threshold", "0.5"},
      {"output_dir", "."},
      {"live_count", "200"},
      {"attack_count", "100"},
      {"image_size", desk ? "64" : "256"},
      {"attacks", "print_lattice,replay_moire"},
      {"domain_tag", "train"},
      {"brightness", "0"},
      {"brightness_spread", "0"},
      {"noise_sigma", "0.012"},
      {"noise_spread", "0"},
      {"color_gain", "1,1,1"},
      {"lattice_period", "4"},
      {"skin_grain", "0.08"},
      {"media_tone", "0"},
      {"gradcheck_trials", "20"},
      {"gradcheck_tolerance", "0.0001"},
  };
  if (search) {
    d["input_size"] = desk ? "32" : "256";
    d["channel_scale"] = desk ? "0.0625" : "1";
    d["width_multiplier"] = "1";
    d["mafm"] = "off";
    d["epochs"] = desk ? "30" : "60";
    d["batch_size"] = desk ? "8" : "12";
    d["lr"] = desk ? "0.001" : "0.0001";
    if (desk) d["arch_lr"] = "0.003";
  } else {
    const bool pp = model == "cdcnpp";
    d["input_size"] = desk ? "64" : "256";
    d["channel_scale"] = desk ? (pp ? "0.0625" : "0.25") : "1";
    d["width_multiplier"] = pp ? "2" : "1";
    d["mafm"] = pp ? "on" : "off";
    d["epochs"] = desk ? "20" : "1300";
    d["batch_size"] = desk ? "8" : "56";
    d["lr"] = desk ? "0.001" : "0.0001";
  }
  return d;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(n) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(n) + ": empty key");
    if (c.has(key)) throw ConfigError("config line " + std::to_string(n) + ": key '" + key + "' set twice");
    try {
      c.set(key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  const auto bytes = read_file(path);
  return parse(std::string(bytes.begin(), bytes.end()));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
  if (value.find_first_of("\r\n") != std::string::npos) throw ConfigError("value of '" + key + "' spans lines");
  values_[key] = value;
}

RunConfig RunConfig::resolved(const std::string& command) const {
  RunConfig out = *this;
  const std::string preset = has("preset") ? str("preset") : "desk";
  out.values_["preset"] = preset;
  const std::string model = has("model") ? str("model") : "cdcn";
  for (const auto& [k, v] : preset_defaults(preset, command, model)) out.values_.try_emplace(k, v);
  return out;
}

const std::string& RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config key '" + key + "' is not set");
  return it->second;
}

double RunConfig::num(const std::string& key) const {
  const std::string& s = str(key);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not a finite number");
  }
  return v;
}

std::size_t RunConfig::count(const std::string& key) const {
  const std::string& s = str(key);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': '" + s + "' is not a non-negative integer");
  }
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& s = str(key);
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected on or off, got '" + s + "'");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(str(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list item");
    out.push_back(item);
  }
  return out;
}

std::string RunConfig::format() const {
  std::ostringstream os;
  for (const auto& k : config_keys()) {
    if (const auto it = values_.find(k.name); it != values_.end()) os << k.name << " = " << it->second << "\n";
  }
  return os.str();
}

}  // namespace cdcnet
