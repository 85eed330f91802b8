#include "cdcnet/harness/gradsuite.hpp"

#include <functional>

#include "cdcnet/cdc/cdc.hpp"
#include "cdcnet/losses/losses.hpp"
#include "cdcnet/nas/supernet.hpp"
#include "cdcnet/nets/layers.hpp"
#include "cdcnet/tensor/gradcheck.hpp"

namespace cdcnet {

namespace {

Parameter<double> rand_param(const std::string& name, Shape s, Rng& rng, double lo = -1, double hi = 1) {
  Parameter<double> p{name, Tensor<double>(s), true};
  for (auto& v : p.value.data()) v = rng.uniform(lo, hi);
  return p;
}

/// sum(x * r) for a fixed random r, so every output coordinate matters.
Var<double> project(Var<double> x, Rng& rng) {
  Tensor<double> r(x.shape());
  for (auto& v : r.data()) v = rng.uniform(-1, 1);
  return sum_all(hadamard(x, x.tape().constant(std::move(r))));
}

using Trial = std::function<GradCheckReport(Rng&, std::size_t)>;

GradCheckReport check(const std::function<Var<double>(Tape<double>&, Rng&)>& build,
                      const std::vector<Parameter<double>*>& targets, std::uint64_t proj_seed) {
  return finite_difference_check(
      [&](Tape<double>& t) {
        Rng r(proj_seed);
        return build(t, r);
      },
      targets);
}

GradCheckReport conv_trial(Rng& rng, std::size_t i) {
  const std::size_t k = i % 2 ? 5 : 3;
  const ConvGeometry g{k, 1 + i % 2, static_cast<std::size_t>(i % 3 == 0 ? 0 : k / 2)};
  auto x = rand_param("x", Shape{2, 1 + rng.below(3), 7, 6}, rng);
  auto w = rand_param("w", Shape{1 + rng.below(3), x.value.shape().c, k, k}, rng);
  return check([&](Tape<double>& t, Rng& r) { return project(conv2d(t.watch(x), t.watch(w), g), r); }, {&x, &w},
               rng.next_u64());
}

GradCheckReport cdc_fixed_trial(Rng& rng, std::size_t i) {
  const std::size_t k = i % 2 ? 5 : 3;
  const ConvGeometry g{k, 1, static_cast<std::size_t>(i % 3 == 0 ? 0 : k / 2)};
  auto x = rand_param("x", Shape{2, 1 + rng.below(3), 7, 7}, rng);
  auto w = rand_param("w", Shape{1 + rng.below(3), x.value.shape().c, k, k}, rng);
  const double theta = rng.uniform(0, 1);
  return check([&](Tape<double>& t, Rng& r) { return project(cdc_conv(t.watch(x), t.watch(w), g, theta), r); },
               {&x, &w}, rng.next_u64());
}

GradCheckReport cdc_adaptive_trial(Rng& rng, std::size_t i) {
  const ConvGeometry g{3, 1, i % 2};
  auto x = rand_param("x", Shape{2, 2, 6, 6}, rng);
  auto w = rand_param("w", Shape{3, 2, 3, 3}, rng);
  auto pre = rand_param("pre_theta", Shape{1, 1, 1, 1}, rng, -2, 2);
  return check(
      [&](Tape<double>& t, Rng& r) { return project(cdc_conv(t.watch(x), t.watch(w), g, adaptive_theta(t.watch(pre))), r); },
      {&x, &w, &pre}, rng.next_u64());
}

GradCheckReport batchnorm_trial(Rng& rng, std::size_t i) {
  auto x = rand_param("x", Shape{3, 2, 3, 3}, rng);
  auto scale = rand_param("scale", Shape{1, 2, 1, 1}, rng, 0.5, 1.5);
  auto shift = rand_param("shift", Shape{1, 2, 1, 1}, rng);
  BatchNormState<double> state(2);
  for (auto& v : state.running_var.data()) v = rng.uniform(0.5, 2);
  const Mode mode = i % 2 ? Mode::infer : Mode::train;
  return check(
      [&](Tape<double>& t, Rng& r) {
        BatchNormState<double> local = state;
        return project(batchnorm(t.watch(x), t.watch(scale), t.watch(shift), local, mode), r);
      },
      {&x, &scale, &shift}, rng.next_u64());
}

GradCheckReport primitives_trial(Rng& rng, std::size_t i) {
  auto a = rand_param("a", Shape{2, 2, 6, 6}, rng);
  auto b = rand_param("b", Shape{2, 2, 6, 6}, rng);
  auto logits = rand_param("logits", Shape{1, 1, 1, 4}, rng, -2, 2);
  return check(
      [&](Tape<double>& t, Rng& r) {
        Var<double> av = t.watch(a), bv = t.watch(b);
        Var<double> mixed = add(relu(sub(av, bv)), sigmoid(hadamard(av, bv)));
        Var<double> cat = concat_channels<double>({mixed, channel_avg(av), channel_max(bv)});
        Var<double> w = element(softmax(t.watch(logits)), i % 4);
        Var<double> pooled = max_pool2d(scale_by(cat, w), 3, 2, 1);
        return add(project(pooled, r), mean_all(maxpool2x2(cat)));
      },
      {&a, &b, &logits}, rng.next_u64());
}

GradCheckReport mafm_trial(Rng& rng, std::size_t) {
  Mafm<double> mafm("mafm");
  mafm.init(rng);
  const std::size_t c = 1 + rng.below(3);
  auto low = rand_param("low", Shape{2, c, 5, 5}, rng);
  auto mid = rand_param("mid", Shape{2, c, 5, 5}, rng);
  auto high = rand_param("high", Shape{2, c, 5, 5}, rng);
  std::vector<Parameter<double>*> targets{&low, &mid, &high};
  for (std::size_t l = 0; l < 3; ++l) targets.push_back(&mafm.weight(l));
  return check(
      [&](Tape<double>& t, Rng& r) { return project(mafm.forward(t, t.watch(low), t.watch(mid), t.watch(high)), r); },
      targets, rng.next_u64());
}

GradCheckReport mse_trial(Rng& rng, std::size_t) {
  auto pred = rand_param("pred", Shape{2, 1, 4, 4}, rng);
  auto target = rand_param("target", Shape{2, 1, 4, 4}, rng, 0, 1);
  return check([&](Tape<double>& t, Rng&) { return loss_mse(t.watch(pred), t.watch(target)); }, {&pred, &target},
               rng.next_u64());
}

GradCheckReport cdl_trial(Rng& rng, std::size_t i) {
  const std::size_t e = 3 + i % 4;
  auto pred = rand_param("pred", Shape{2, 1, e, e}, rng);
  auto target = rand_param("target", Shape{2, 1, e, e}, rng, 0, 1);
  return check([&](Tape<double>& t, Rng&) { return loss_cdl(t.watch(pred), t.watch(target)); }, {&pred, &target},
               rng.next_u64());
}

GradCheckReport supernet_trial(Rng& rng, std::size_t i) {
  SupernetConfig c;
  c.backbone.input_size = 24;
  c.backbone.channel_scale = 1.0 / 32;
  c.backbone.use_mafm = i % 2 == 0;
  c.backbone.nodes = 2;
  c.catalog = {OpSpec::parse("none"), OpSpec::parse("skip_connect"), OpSpec::parse("cdc_single")};
  c.sharing = i % 3 == 0 ? Sharing::shared_cells : Sharing::varied_cells;
  c.node_attention = true;
  Supernet<double> net(c);
  net.init(rng);
  net.arch().randomize(rng, 1.0);
  Tensor<double> images(Shape{2, 3, 24, 24}), target(Shape{2, 1, 3, 3});
  for (auto& v : images.data()) v = rng.uniform(0, 1);
  for (auto& v : target.data()) v = rng.uniform(0, 1);
  return check(
      [&](Tape<double>& t, Rng&) {
        return loss_overall(net.forward(t, t.constant(images), Mode::infer), t.constant(target));
      },
      net.arch().parameters(), rng.next_u64());
}

}  // namespace

std::vector<GradSuiteResult> run_gradcheck_suite(std::size_t trials, std::uint64_t seed, double tolerance) {
  const std::pair<const char*, Trial> cases[] = {
      {"conv2d", conv_trial},           {"cdc_fixed_theta", cdc_fixed_trial}, {"cdc_adaptive_theta", cdc_adaptive_trial},
      {"batchnorm", batchnorm_trial},   {"primitives", primitives_trial},     {"mafm", mafm_trial},
      {"loss_mse", mse_trial},          {"loss_cdl", cdl_trial},              {"supernet_arch", supernet_trial},
  };
  std::vector<GradSuiteResult> out;
  Rng root(seed);
  std::uint64_t stream = 0;
  for (const auto& [name, trial] : cases) {
    GradSuiteResult r;
    r.op = name;
    r.trials = trials;
    Rng rng = root.fork(stream++);
    for (std::size_t i = 0; i < trials; ++i) {
      const GradCheckReport rep = trial(rng, i);
      if (rep.max_rel_error >= r.max_rel_error) {
        r.max_rel_error = rep.max_rel_error;
        r.worst = rep.worst;
      }
    }
    r.passed = r.max_rel_error <= tolerance;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cdcnet
