#include "cdcnet/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdcnet/losses/losses.hpp"

namespace cdcnet {

std::size_t default_halving_period(std::size_t epochs) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(epochs) / 2.6)));
}

std::vector<EpochLog> train_model(DepthModel<float>& model, const std::vector<Sample>& train, const TrainConfig& config,
                                  const std::function<void(const EpochLog&)>& on_epoch) {
  if (config.epochs == 0) return {};
  if (train.empty()) throw DataError("training set is empty");
  if (config.batch_size < 2) throw ConfigError("batch_size must be at least 2 for batch normalisation");
  const std::size_t halving = config.lr_halving ? config.lr_halving : default_halving_period(config.epochs);
  StateDict<float> state = model.state();
  Adam<float> adam(state.trainable(), AdamConfig{config.lr, config.weight_decay});
  Rng rng = Rng(config.seed).fork(0x7a11);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochLog> logs;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    adam.config().lr = config.lr * std::pow(0.5, static_cast<double>(epoch / halving));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t end = std::min(order.size(), start + config.batch_size);
      if (end - start < 2) break;  // a lone trailing sample cannot be batch-normalised
      const Batch b = make_batch(train, std::vector<std::size_t>(order.begin() + start, order.begin() + end));
      Tape<float> tape;
      Var<float> pred = model.forward(tape, tape.constant(b.images), Mode::train);
      Var<float> loss = loss_overall(pred, tape.constant(b.depths));
      const double l = loss.value().item();
      if (!std::isfinite(l)) throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch + 1));
      adam.step(tape.backward(loss));
      total += l * static_cast<double>(end - start);
      seen += end - start;
    }
    logs.push_back({epoch + 1, total / static_cast<double>(std::max<std::size_t>(seen, 1)), adam.config().lr});
    if (on_epoch) on_epoch(logs.back());
  }
  return logs;
}

std::vector<double> score_samples(DepthModel<float>& model, const std::vector<Sample>& samples, std::size_t batch_size) {
  std::vector<double> out;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    std::vector<std::size_t> idx(std::min(batch_size, samples.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto scores = depth_scores(model.predict(make_batch(samples, idx).images));
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

ScoreSet make_score_set(const std::vector<Sample>& samples, const std::vector<double>& scores) {
  if (samples.size() != scores.size()) throw DataError("score count does not match sample count");
  ScoreSet s;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].live) s.add_live(samples[i].sample_id, scores[i]);
    else s.add_attack(samples[i].sample_id, scores[i], samples[i].attack);
  }
  return s;
}

EvalReport evaluate_at(const ScoreSet& test, double threshold) {
  EvalReport r;
  r.threshold = threshold;
  r.rates = apcer_bpcer_acer(test, threshold);
  r.test_eer = eer(test);
  r.hter = half_total_error(test, threshold);
  r.auc = auc(test);
  return r;
}

EvalReport evaluate_with_dev(const ScoreSet& dev, const ScoreSet& test) { return evaluate_at(test, eer(dev).threshold); }

}  // namespace cdcnet
