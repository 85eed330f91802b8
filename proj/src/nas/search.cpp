#include "cdcnet/nas/search.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "cdcnet/data/pnm.hpp"
#include "cdcnet/losses/losses.hpp"
#include "cdcnet/metrics/metrics.hpp"

namespace cdcnet {

using nlohmann::json;

std::size_t SearchConfig::resolved_warmup() const {
  if (warmup) return warmup;
  return epochs > 1 ? std::max<std::size_t>(1, epochs / 6) : 0;
}

void SearchConfig::validate() const {
  if (batch_size < 2) throw ConfigError("search: batch_size must be at least 2");
  if (warmup >= epochs && epochs > 0) throw ConfigError("search: warmup must be shorter than the search");
  for (double v : {weight_lr, weight_decay, arch_lr, arch_weight_decay}) {
    if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("search: learning rates and decays must be finite and non-negative");
  }
}

Searcher::Searcher(Supernet<float>& net, const SearchConfig& config)
    : net_(net),
      config_(config),
      weight_opt_(net.state().trainable(), AdamConfig{config.weight_lr, config.weight_decay}),
      arch_opt_(net.arch().parameters(), AdamConfig{config.arch_lr, config.arch_weight_decay}) {
  config_.validate();
}

namespace {

double step_on(DepthModel<float>& net, const Batch& b, Adam<float>& opt, const char* what) {
  Tape<float> tape;
  Var<float> pred = net.forward(tape, tape.constant(b.images), Mode::train);
  Var<float> loss = loss_overall(pred, tape.constant(b.depths));
  const double l = loss.value().item();
  if (!std::isfinite(l)) throw NumericError(std::string("search: ") + what + " loss became non-finite");
  opt.step(tape.backward(loss));
  return l;
}

}  // namespace

std::pair<double, double> Searcher::bilevel_step(const Batch& train, const Batch& val, std::size_t epoch) {
  double val_loss = std::nan("");
  if (epoch >= config_.resolved_warmup()) {
    val_loss = step_on(net_, val, arch_opt_, "validation");
    net_.arch().check_finite();
  }
  return {step_on(net_, train, weight_opt_, "training"), val_loss};
}

std::vector<SearchEpoch> Searcher::run(const std::vector<Sample>& train, const std::vector<Sample>& val,
                                       const std::function<void(const SearchEpoch&)>& on_epoch) {
  if (train.empty() || val.empty()) throw DataError("search: training and validation splits must be non-empty");
  Rng rng = Rng(config_.seed).fork(0x5ea7);
  std::vector<std::size_t> to(train.size()), vo(val.size());
  std::iota(to.begin(), to.end(), 0);
  std::iota(vo.begin(), vo.end(), 0);
  const std::size_t bs = config_.batch_size;
  std::vector<SearchEpoch> trace;
  for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
    for (std::size_t i = to.size(); i > 1; --i) std::swap(to[i - 1], to[rng.below(i)]);
    for (std::size_t i = vo.size(); i > 1; --i) std::swap(vo[i - 1], vo[rng.below(i)]);
    double total = 0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start + 2 <= to.size(); start += bs) {
      const std::size_t end = std::min(to.size(), start + bs);
      if (end - start < 2) break;
      // The validation split is cycled if it is smaller than the training one.
      std::vector<std::size_t> vi;
      for (std::size_t k = 0; k < end - start; ++k) vi.push_back(vo[(start + k) % vo.size()]);
      const Batch tb = make_batch(train, std::vector<std::size_t>(to.begin() + start, to.begin() + end));
      total += bilevel_step(tb, make_batch(val, vi), epoch).first;
      ++steps;
    }
    SearchEpoch e;
    e.epoch = epoch + 1;
    e.train_loss = total / static_cast<double>(std::max<std::size_t>(steps, 1));
    e.val_loss = evaluate_loss(net_, val, bs);
    for (std::size_t k = 0; k < net_.arch().cells(); ++k) e.entropy.push_back(cell_entropy(net_.arch(), k));
    e.arch_updated = epoch >= config_.resolved_warmup();
    trace.push_back(e);
    if (on_epoch) on_epoch(e);
  }
  return trace;
}

double evaluate_loss(DepthModel<float>& model, const std::vector<Sample>& samples, std::size_t batch_size) {
  if (samples.empty()) throw DataError("cannot evaluate a loss on an empty split");
  double total = 0;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    std::vector<std::size_t> idx(std::min(batch_size, samples.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const Batch b = make_batch(samples, idx);
    Tape<float> tape(false);
    Var<float> pred = tape.constant(model.predict(b.images));
    total += loss_overall(pred, tape.constant(b.depths)).value().item() * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(samples.size());
}

double cell_entropy(const ArchParams<float>& arch, std::size_t cell) {
  double sum = 0;
  const std::size_t edges = edge_count(arch.nodes());
  for (std::size_t e = 0; e < edges; ++e)
    for (double p : arch.eta(cell, e))
      if (p > 0) sum -= p * std::log(p);
  return sum / static_cast<double>(edges);
}

std::string format_trace_csv(const std::vector<SearchEpoch>& trace) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss";
  const std::size_t cells = trace.empty() ? 0 : trace.front().entropy.size();
  for (std::size_t k = 0; k < cells; ++k) os << ",entropy_cell" << k + 1;
  os << "\n";
  for (const auto& e : trace) {
    os << e.epoch << "," << format_double(e.train_loss) << "," << format_double(e.val_loss);
    for (double h : e.entropy) os << "," << format_double(h);
    os << "\n";
  }
  return os.str();
}

std::string format_arch_json(const ArchParams<float>& arch, const OpCatalog& catalog) {
  if (catalog.size() != arch.ops()) throw ConfigError("catalog size does not match the architecture parameters");
  json doc;
  doc["format"] = "cdcnet-arch";
  doc["version"] = 1;
  doc["sharing"] = sharing_name(arch.sharing());
  doc["nodes"] = arch.nodes();
  doc["cells"] = arch.cells();
  json ops = json::array();
  for (const auto& op : catalog) ops.push_back(op.name());
  doc["catalog"] = ops;
  json sets = json::array();
  const std::size_t n = arch.sharing() == Sharing::shared_cells ? 1 : arch.cells();
  for (std::size_t k = 0; k < n; ++k) {
    const CellArch<float>& c = arch.cell(k);
    json alpha = json::array();
    for (const auto& a : c.alpha) alpha.push_back(a.value.data());
    sets.push_back({{"alpha", alpha}, {"beta", c.beta.value.data()}});
  }
  doc["logits"] = sets;
  return doc.dump(1) + "\n";
}

std::unique_ptr<ArchParams<float>> parse_arch_json(const std::string& text, OpCatalog& catalog) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "cdcnet-arch" || doc.at("version") != 1) throw DataError("arch file: unsupported format");
    OpCatalog cat;
    for (const auto& name : doc.at("catalog")) cat.push_back(OpSpec::parse(name.get<std::string>()));
    const auto nodes = doc.at("nodes").get<std::size_t>(), cells = doc.at("cells").get<std::size_t>();
    auto arch = std::make_unique<ArchParams<float>>(cat.size(), nodes, parse_sharing(doc.at("sharing")), cells);
    const json& sets = doc.at("logits");
    const std::size_t n = arch->sharing() == Sharing::shared_cells ? 1 : cells;
    if (sets.size() != n) throw DataError("arch file: expected " + std::to_string(n) + " logit sets");
    for (std::size_t k = 0; k < n; ++k) {
      CellArch<float>& c = arch->cell(k);
      const json& alpha = sets[k].at("alpha");
      if (alpha.size() != c.alpha.size()) throw DataError("arch file: wrong edge count in set " + std::to_string(k));
      auto fill = [](Tensor<float>& t, const json& v, const std::string& what) {
        const auto vals = v.get<std::vector<float>>();
        if (vals.size() != t.numel()) throw DataError("arch file: wrong length for " + what);
        std::copy(vals.begin(), vals.end(), t.raw());
      };
      for (std::size_t e = 0; e < alpha.size(); ++e) fill(c.alpha[e].value, alpha[e], c.alpha[e].name);
      fill(c.beta.value, sets[k].at("beta"), c.beta.name);
    }
    arch->check_finite();
    catalog = std::move(cat);
    return arch;
  } catch (const json::exception& e) {
    throw DataError(std::string("arch file: ") + e.what());
  }
}

void write_arch(const std::string& path, const ArchParams<float>& arch, const OpCatalog& catalog) {
  const std::string text = format_arch_json(arch, catalog);
  write_file(path, std::vector<unsigned char>(text.begin(), text.end()));
}

std::unique_ptr<ArchParams<float>> read_arch(const std::string& path, OpCatalog& catalog) {
  const auto bytes = read_file(path);
  return parse_arch_json(std::string(bytes.begin(), bytes.end()), catalog);
}

}  // namespace cdcnet
