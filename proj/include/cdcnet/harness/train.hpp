#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cdcnet/data/synth.hpp"
#include "cdcnet/metrics/metrics.hpp"
#include "cdcnet/nas/adam.hpp"
#include "cdcnet/nets/model.hpp"

namespace cdcnet {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double lr = 1e-4;
  double weight_decay = 5e-5;
  std::uint64_t seed = 1;
  /// Halve the learning rate every this many epochs; 0 = round(epochs / 2.6).
  std::size_t lr_halving = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0;
  double lr = 0;
};

/// round(epochs / 2.6), at least 1.
std::size_t default_halving_period(std::size_t epochs);

/// Shuffled mini-batch Adam on L_MSE + L_CDL. Throws NumericError on a
/// non-finite loss.
std::vector<EpochLog> train_model(DepthModel<float>& model, const std::vector<Sample>& train, const TrainConfig& config,
                                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Mean predicted depth per sample, batched inference.
std::vector<double> score_samples(DepthModel<float>& model, const std::vector<Sample>& samples,
                                  std::size_t batch_size = 32);

ScoreSet make_score_set(const std::vector<Sample>& samples, const std::vector<double>& scores);

struct EvalReport {
  double threshold = 0;  // dev EER threshold, or the fixed one
  ErrorRates rates;
  EerPoint test_eer;
  double hter = 0;
  double auc = 0;
};

/// Error rates of `test` at `threshold`, plus threshold-free metrics.
EvalReport evaluate_at(const ScoreSet& test, double threshold);
/// Threshold fixed at the EER point of `dev`.
EvalReport evaluate_with_dev(const ScoreSet& dev, const ScoreSet& test);

}  // namespace cdcnet
