#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cdcnet/data/synth.hpp"
#include "cdcnet/nas/adam.hpp"
#include "cdcnet/nas/supernet.hpp"

namespace cdcnet {

struct SearchConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double weight_lr = 1e-4;
  double weight_decay = 5e-5;
  double arch_lr = 6e-4;
  double arch_weight_decay = 1e-3;
  /// Epochs with frozen architecture; 0 = epochs / 6, at least 1 when epochs > 1.
  std::size_t warmup = 0;
  std::uint64_t seed = 1;

  std::size_t resolved_warmup() const;
  void validate() const;
};

struct SearchEpoch {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double val_loss = 0;
  std::vector<double> entropy;  // mean eta entropy per cell
  bool arch_updated = false;
};

/// First-order bi-level optimisation of a supernet: arch step on a
/// validation batch, then a weight step on a training batch.
class Searcher {
 public:
  Searcher(Supernet<float>& net, const SearchConfig& config);

  /// `epoch` is 0-based; arch parameters are untouched during warm-up.
  /// Returns the (train, val) batch losses.
  std::pair<double, double> bilevel_step(const Batch& train, const Batch& val, std::size_t epoch);

  /// Full search; the validation loss of each epoch is measured in inference
  /// mode over the whole validation split.
  std::vector<SearchEpoch> run(const std::vector<Sample>& train, const std::vector<Sample>& val,
                               const std::function<void(const SearchEpoch&)>& on_epoch = {});

  const SearchConfig& config() const { return config_; }

 private:
  Supernet<float>& net_;
  SearchConfig config_;
  Adam<float> weight_opt_;
  Adam<float> arch_opt_;
};

/// Mean loss_overall of `model` in inference mode.
double evaluate_loss(DepthModel<float>& model, const std::vector<Sample>& samples, std::size_t batch_size);

/// Mean Shannon entropy (nats) of eta over the edges of one cell.
double cell_entropy(const ArchParams<float>& arch, std::size_t cell);

std::string format_trace_csv(const std::vector<SearchEpoch>& trace);

/// JSON document holding the logits, sharing mode and catalog names.
std::string format_arch_json(const ArchParams<float>& arch, const OpCatalog& catalog);
/// Rebuilds the parameters; the catalog is returned through `catalog`.
std::unique_ptr<ArchParams<float>> parse_arch_json(const std::string& text, OpCatalog& catalog);
void write_arch(const std::string& path, const ArchParams<float>& arch, const OpCatalog& catalog);
std::unique_ptr<ArchParams<float>> read_arch(const std::string& path, OpCatalog& catalog);

}  // namespace cdcnet
