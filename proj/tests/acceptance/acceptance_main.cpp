// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Run from ctest or directly; `--only N[,M...]` selects a
// subset.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdcnet/cdc/cdc.hpp"
#include "cdcnet/data/manifest.hpp"
#include "cdcnet/data/pnm.hpp"
#include "cdcnet/harness/commands.hpp"
#include "cdcnet/harness/gradsuite.hpp"
#include "cdcnet/harness/train.hpp"
#include "cdcnet/nas/search.hpp"
#include "cdcnet/nets/cdcnpp.hpp"
#include "cdcnet/nets/model_io.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cdcnet;
using cdcnet::testing::random_tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

__attribute__((format(printf, 1, 2))) std::string fmt(const char* f, ...) {
  char buf[512];
  std::va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cdcnet_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<unsigned char> bytes_of(const fs::path& p) { return read_file(p.string()); }

// ---------------------------------------------------------------- 1, 2

Outcome operator_equivalence() {
  const double t0 = cpu_seconds();
  Rng rng(11);
  double worst32 = 0, worst64 = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = trial % 2 ? 3 : 5, pad = (trial / 2) % 2;
    const std::size_t ci = 1 + rng.below(8), co = 1 + rng.below(8);
    const std::size_t h = k + rng.below(6), w = k + rng.below(6);
    const double theta = rng.uniform();
    const ConvGeometry g{k, 1, pad};
    const Tensor<double> x = random_tensor<double>(Shape{1 + rng.below(2), ci, h, w}, rng);
    const Tensor<double> wt = random_tensor<double>(Shape{co, ci, k, k}, rng);
    worst64 = std::max(worst64, max_abs_diff(cdc_forward_direct(x, wt, g, theta), cdc_forward_decomposed(x, wt, g, theta)));
    Tensor<float> xf(x.shape()), wf(wt.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) xf[i] = static_cast<float>(x[i]);
    for (std::size_t i = 0; i < wt.numel(); ++i) wf[i] = static_cast<float>(wt[i]);
    const float tf = static_cast<float>(theta);
    worst32 = std::max(worst32, static_cast<double>(max_abs_diff(cdc_forward_direct(xf, wf, g, tf),
                                                                 cdc_forward_decomposed(xf, wf, g, tf))));
  }
  const double secs = cpu_seconds() - t0;
  return {worst32 <= 1e-5 && worst64 <= 1e-10 && secs < 10,
          fmt("max|direct-decomposed| %.2e (f32) %.2e (f64), %.2f s", worst32, worst64, secs)};
}

Outcome degeneracy() {
  Rng rng(12);
  int equal = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = trial % 2 ? 3 : 5, pad = rng.below(2);
    const std::size_t ci = 1 + rng.below(8), co = 1 + rng.below(8);
    const Tensor<float> x = random_tensor<float>(Shape{1 + rng.below(2), ci, k + rng.below(6), k + rng.below(6)}, rng);
    const Tensor<float> w = random_tensor<float>(Shape{co, ci, k, k}, rng);
    const ConvGeometry g{k, 1, pad};
    const Tensor<float> plain = conv2d_forward(x, w, 1, static_cast<long>(pad));
    Tape<float> tape(false);
    const Tensor<float> via_layer =
        cdc_conv(tape.constant(x), tape.constant(w), g, 0.0f).value();
    equal += bitwise_equal(cdc_forward_decomposed(x, w, g, 0.0f), plain) && bitwise_equal(via_layer, plain);
  }
  return {equal == 50, fmt("%d/50 cases bitwise equal to conv2d", equal)};
}

// ---------------------------------------------------------------- 3, 4, 5

Outcome gradient_oracle() {
  const double t0 = cpu_seconds();
  const auto results = run_gradcheck_suite(20, 1, 1e-4);
  const double secs = cpu_seconds() - t0;
  bool ok = secs < 120;
  double worst = 0;
  std::string failing;
  for (const auto& r : results) {
    ok = ok && r.passed && r.trials >= 20;
    worst = std::max(worst, r.max_rel_error);
    if (!r.passed) failing += " " + r.op;
  }
  return {ok, fmt("%.0f operations x 20 trials, worst rel error %.2e, %.1f s", static_cast<double>(results.size()),
                  worst, secs) +
                  (failing.empty() ? "" : ", failing:" + failing)};
}

Outcome parameter_count() {
  Cdcn<float> cdc(CdcnConfig{256, 1.0, FixedTheta{0.7}, false});
  Cdcn<float> vanilla(CdcnConfig{256, 1.0, FixedTheta{0.0}, false});
  const double n = static_cast<double>(cdc.conv_parameter_count());
  const bool ok = std::abs(n - 2.25e6) <= 0.05 * 2.25e6 && cdc.conv_parameter_count() == vanilla.conv_parameter_count();
  return {ok, fmt("%.0f conv parameters (theta 0: %.0f), %.2f%% from 2.25e6", n,
                  static_cast<double>(vanilla.conv_parameter_count()), 100 * (n - 2.25e6) / 2.25e6)};
}

Outcome metric_oracles() {
  Rng rng(13);
  int agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ScoreSet s = oracle::random_scores(rng);
    const double thr = s.entries[rng.below(s.entries.size())].score;
    const ErrorRates r = apcer_bpcer_acer(s, thr);
    const oracle::Counts c = oracle::rates(s, thr);
    const double ap = oracle::apcer(s, thr);
    const EerPoint e = eer(s);
    const bool ok = r.apcer == ap && r.bpcer == c.frr && r.acer == (ap + c.frr) / 2 &&
                    half_total_error(s, thr) == (c.far + c.frr) / 2 && e.eer == oracle::eer(s) &&
                    hter(s, s) == half_total_error(s, e.threshold) && std::abs(auc(s) - oracle::auc(s)) <= 1e-9;
    agree += ok;
  }
  ScoreSet hand;
  hand.add_live("l0", 0.9);
  hand.add_live("l1", 0.2);
  hand.add_attack("a0", 0.8, "A");
  hand.add_attack("b0", 0.1, "B");
  const ErrorRates hr = apcer_bpcer_acer(hand, 0.5);
  const bool hand_ok = hr.apcer == 1.0 && hr.bpcer == 0.5 && hr.acer == 0.75;
  return {agree == 200 && hand_ok,
          fmt("%d/200 random sets match the oracles; hand case (%.2f, %.2f, %.2f)", agree, hr.apcer, hr.bpcer,
              hr.acer)};
}

// ---------------------------------------------------------------- 6, 7

// Desk training protocol shared by the two training criteria.
constexpr std::size_t kTrainEpochs = 20;
constexpr std::size_t kTrainBatch = 8;
constexpr double kTrainLr = 1e-3;
// Low-light capture: darker and noisier than the training domain (0, 0.012).
constexpr double kShiftBrightness = -0.1;
constexpr double kShiftNoise = 0.015;

SynthConfig desk_synth(std::uint64_t seed, std::size_t live, std::size_t attack, const std::string& tag) {
  SynthConfig s;
  s.seed = seed;
  s.image_size = 64;
  s.live_count = live;
  s.attack_count = attack;
  s.domain_tag = tag;
  return s;
}

struct DeskRun {
  double cpu = 0;
  double acer = 0;
  double shifted_acer = 0;
};

DeskRun desk_run(double theta, std::uint64_t seed) {
  const double t0 = cpu_seconds();
  const auto train = generate(desk_synth(1000 + seed, 200, 100, "train"));
  const auto dev = generate(desk_synth(2000 + seed, 50, 25, "dev"));
  const auto test = generate(desk_synth(3000 + seed, 100, 50, "test"));
  CdcnConfig c = CdcnConfig::desk();
  c.theta_mode = FixedTheta{theta};
  Cdcn<float> model(c);
  Rng rng(seed);
  model.init(rng);
  TrainConfig tc;
  tc.epochs = kTrainEpochs;
  tc.batch_size = kTrainBatch;
  tc.lr = kTrainLr;
  tc.seed = seed;
  train_model(model, train, tc);
  const ScoreSet dev_scores = make_score_set(dev, score_samples(model, dev));
  DeskRun r;
  r.acer = evaluate_with_dev(dev_scores, make_score_set(test, score_samples(model, test))).rates.acer;
  r.cpu = cpu_seconds() - t0;

  SynthConfig shifted = desk_synth(3000 + seed, 100, 50, "test_shifted");
  shifted.domain.brightness = kShiftBrightness;
  shifted.domain.noise_sigma = kShiftNoise;
  const auto shifted_test = generate(shifted);
  r.shifted_acer = evaluate_with_dev(dev_scores, make_score_set(shifted_test, score_samples(model, shifted_test))).rates.acer;
  std::printf("    theta %.1f seed %llu: test ACER %.3f, shifted ACER %.3f, %.0f s\n", theta,
              static_cast<unsigned long long>(seed), r.acer, r.shifted_acer, r.cpu);
  std::fflush(stdout);
  return r;
}

std::vector<DeskRun> cdc_runs, vanilla_runs;

void ensure_desk_runs(std::size_t cdc_seeds, std::size_t vanilla_seeds) {
  while (cdc_runs.size() < cdc_seeds) cdc_runs.push_back(desk_run(0.7, cdc_runs.size() + 1));
  while (vanilla_runs.size() < vanilla_seeds) vanilla_runs.push_back(desk_run(0.0, vanilla_runs.size() + 1));
}

Outcome desk_training() {
  ensure_desk_runs(3, 0);
  std::vector<double> acer, cpu;
  for (std::size_t i = 0; i < 3; ++i) acer.push_back(cdc_runs[i].acer), cpu.push_back(cdc_runs[i].cpu);
  const double m = median(acer), worst_cpu = *std::max_element(cpu.begin(), cpu.end());
  return {m <= 0.05 && worst_cpu <= 600,
          fmt("median test ACER %.3f over 3 seeds (%.3f %.3f %.3f), slowest run %.0f CPU-s of 600", m, acer[0],
              acer[1], acer[2], worst_cpu)};
}

Outcome domain_shift() {
  ensure_desk_runs(5, 5);
  std::vector<double> cdc, vanilla;
  for (std::size_t i = 0; i < 5; ++i) cdc.push_back(cdc_runs[i].shifted_acer), vanilla.push_back(vanilla_runs[i].shifted_acer);
  const double a = median(cdc), b = median(vanilla);
  return {a < b, fmt("median shifted ACER theta 0.7 %.3f vs theta 0 %.3f (brightness %+.2f, noise %.3f)", a, b,
                     kShiftBrightness, kShiftNoise)};
}

// ---------------------------------------------------------------- 8, 9

constexpr std::size_t kSearchEpochs = 30;

SearchConfig desk_search(std::size_t epochs) {
  SearchConfig sc;
  sc.epochs = epochs;
  sc.batch_size = 8;
  sc.weight_lr = 1e-3;
  sc.weight_decay = 5e-5;
  sc.arch_lr = 3e-3;
  sc.arch_weight_decay = 1e-3;
  sc.seed = 5;
  return sc;
}

struct SearchData {
  std::vector<Sample> train, val;
};

SearchData search_data() {
  SynthConfig t;
  t.seed = 4001;
  t.image_size = 32;
  t.live_count = 40;
  t.attack_count = 20;
  SynthConfig v = t;
  v.seed = 4002;
  v.domain_tag = "val";
  return {generate(t), generate(v)};
}

std::vector<std::vector<float>> snapshot(const std::vector<Parameter<float>*>& params) {
  std::vector<std::vector<float>> out;
  for (const auto* p : params) out.emplace_back(p->value.data().begin(), p->value.data().end());
  return out;
}

std::unique_ptr<Supernet<float>> searched;  // reused by criterion 9

Outcome nas_structure() {
  const double t0 = cpu_seconds();
  const SearchData data = search_data();
  SupernetConfig cfg = SupernetConfig::desk();
  searched = std::make_unique<Supernet<float>>(cfg);
  Rng rng(6);
  searched->init(rng);
  const SearchConfig sc = desk_search(kSearchEpochs);
  const std::size_t warmup = sc.resolved_warmup();
  Searcher searcher(*searched, sc);
  const auto arch0 = snapshot(searched->arch().parameters());
  bool frozen = true;
  const auto trace = searcher.run(data.train, data.val, [&](const SearchEpoch& e) {
    if (e.epoch <= warmup) frozen = frozen && !e.arch_updated && snapshot(searched->arch().parameters()) == arch0;
    std::printf("    epoch %2zu train %.4f val %.4f%s\n", e.epoch, e.train_loss, e.val_loss, e.arch_updated ? "" : " (warm-up)");
    std::fflush(stdout);
  });
  const double v_start = trace.at(warmup - 1).val_loss, v_end = trace.back().val_loss;
  const double drop = 1 - v_end / v_start;

  const Genotype g = searched->derive();
  bool valid = true;
  try {
    g.validate();
  } catch (const Error&) {
    valid = false;
  }
  bool argmax_beta = true;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto b = searched->arch().beta(k);
    argmax_beta = argmax_beta && g.cells[k].output == 1 + static_cast<std::size_t>(std::max_element(b.begin(), b.end()) - b.begin());
  }

  // Shared-cell structure on a short search.
  SupernetConfig shared_cfg = cfg;
  shared_cfg.sharing = Sharing::shared_cells;
  Supernet<float> shared(shared_cfg);
  Rng rng2(7);
  shared.init(rng2);
  Searcher shared_search(shared, desk_search(4));
  shared_search.run(data.train, data.val);
  const Genotype gs = shared.derive();
  const bool identical = gs.cells[0] == gs.cells[1] && gs.cells[1] == gs.cells[2];
  const double secs = cpu_seconds() - t0;

  const bool ok = frozen && drop >= 0.5 && valid && identical && argmax_beta && secs < 1200;
  std::string d = fmt("warm-up %.0f epochs ", static_cast<double>(warmup)) + (frozen ? "frozen" : "NOT FROZEN") +
                  fmt("; val loss %.4f -> %.4f (%.0f%% drop)", v_start, v_end, 100 * drop);
  d += std::string("; genotype ") + (valid ? "valid" : "INVALID") + ", shared cells " +
       (identical ? "identical" : "DIFFER") + ", output=argmax beta " + (argmax_beta ? "yes" : "no") +
       fmt(", %.0f s", secs);
  return {ok, d};
}

Outcome supernet_consistency() {
  Rng rng(8);
  double worst = 0, before = 0;
  std::size_t inputs = 0;
  auto compare = [&](Supernet<float>& net) {
    const Genotype g = net.derive();
    CdcnPlusPlus<float> discrete(g, net.config().backbone);
    Checkpoint ck;
    store_state(net.state(), ck);
    load_state(discrete.state(), ck);
    const std::size_t s = net.config().backbone.input_size;
    std::vector<Tensor<float>> xs;
    for (int i = 0; i < 5; ++i) xs.push_back(random_tensor<float>(Shape{1, 3, s, s}, rng, 0, 1));
    // The relaxed supernet differs from the discrete network until eta is concentrated.
    for (const auto& x : xs) before = std::max(before, static_cast<double>(max_abs_diff(net.predict(x), discrete.predict(x))));
    concentrate(net.arch(), g, net.config().catalog);
    for (const auto& x : xs) {
      worst = std::max(worst, static_cast<double>(max_abs_diff(net.predict(x), discrete.predict(x))));
      ++inputs;
    }
  };
  if (!searched) {
    searched = std::make_unique<Supernet<float>>(SupernetConfig::desk());
    searched->init(rng);
    searched->arch().randomize(rng, 1.0);
  }
  compare(*searched);
  // Full CDCN++ layout: doubled width and MAFM fusion.
  SupernetConfig wide = SupernetConfig::desk();
  wide.backbone = CdcnPlusPlus<float>::default_config();
  wide.backbone.input_size = 32;
  wide.backbone.channel_scale = 1.0 / 16;
  Supernet<float> fresh(wide);
  fresh.init(rng);
  fresh.arch().randomize(rng, 2.0);
  compare(fresh);
  return {worst <= 1e-3, fmt("max |supernet - discrete| %.2e over %.0f inputs (%.2e before concentrating)", worst,
                                   static_cast<double>(inputs), before)};
}

// ---------------------------------------------------------------- 10

void run_cli(const std::string& command, RunConfig cfg, const fs::path& out) {
  cfg.set("output_dir", out.string());
  std::ostringstream sink;
  run_command(command, cfg, sink, false);
}

// gen -> train -> eval -> search -> derive through the command layer.
void pipeline(const fs::path& dir) {
  RunConfig gen;
  gen.set("seed", "21");
  gen.set("image_size", "32");
  gen.set("live_count", "8");
  gen.set("attack_count", "4");
  run_cli("gen", gen, dir / "train");
  gen.set("seed", "22");
  gen.set("domain_tag", "dev");
  run_cli("gen", gen, dir / "dev");

  RunConfig train;
  train.set("seed", "3");
  train.set("input_size", "32");
  train.set("channel_scale", "0.125");
  train.set("epochs", "2");
  train.set("batch_size", "4");
  train.set("train_manifest", (dir / "train" / "manifest.csv").string());
  run_cli("train", train, dir / "model");

  RunConfig eval;
  eval.set("checkpoint", (dir / "model" / "model.ckpt").string());
  eval.set("test_manifest", (dir / "dev" / "manifest.csv").string());
  eval.set("dev_manifest", (dir / "train" / "manifest.csv").string());
  run_cli("eval", eval, dir / "eval");

  RunConfig search;
  search.set("seed", "4");
  search.set("input_size", "32");
  search.set("epochs", "3");
  search.set("batch_size", "4");
  search.set("train_manifest", (dir / "train" / "manifest.csv").string());
  search.set("val_manifest", (dir / "dev" / "manifest.csv").string());
  run_cli("search", search, dir / "search");
  RunConfig derive;
  derive.set("arch", (dir / "search" / "arch.json").string());
  run_cli("derive", derive, dir / "search");
}

Outcome round_trips() {
  const fs::path dir = work_dir("roundtrip");
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  Rng rng(9);

  // Checkpoint: weights, buffers and predictions.
  ModelSpec spec;
  spec.cdcn = CdcnConfig{32, 0.125, AdaptiveTheta{0.3}, true};
  auto model = build_model(spec);
  model->init(rng);
  const Tensor<float> probe = random_tensor<float>(Shape{2, 3, 32, 32}, rng, 0, 1);
  save_model((dir / "m.ckpt").string(), spec, *model);
  auto loaded = load_model((dir / "m.ckpt").string());
  check(bitwise_equal(model->predict(probe), loaded.model->predict(probe)), "checkpoint predictions");
  save_model((dir / "m2.ckpt").string(), loaded.spec, *loaded.model);
  check(bytes_of(dir / "m.ckpt") == bytes_of(dir / "m2.ckpt"), "checkpoint bytes");

  // Genotype.
  ArchParams<float> arch(8, 4);
  arch.randomize(rng, 3.0);
  const Genotype g = derive_genotype(arch, default_catalog(), true);
  write_genotype(g, (dir / "g.txt").string());
  check(read_genotype((dir / "g.txt").string()) == g, "genotype");

  // PPM / PGM.
  const Tensor<float> img = random_tensor<float>(Shape{1, 3, 17, 9}, rng, 0, 1);
  const Tensor<float> dep = random_tensor<float>(Shape{1, 1, 8, 8}, rng, 0, 1);
  save_ppm(img, (dir / "i.ppm").string());
  save_pgm(dep, (dir / "d.pgm").string());
  const Tensor<float> img2 = load_ppm((dir / "i.ppm").string()), dep2 = load_pgm((dir / "d.pgm").string());
  check(max_abs_diff(img, img2) <= 1.0f / 255 && max_abs_diff(dep, dep2) <= 1.0f / 255, "netpbm quantisation");
  save_ppm(img2, (dir / "i2.ppm").string());
  check(bytes_of(dir / "i.ppm") == bytes_of(dir / "i2.ppm"), "netpbm bytes");

  // Manifest and scores.
  std::vector<ManifestEntry> rows;
  for (int i = 0; i < 5; ++i)
    rows.push_back({"s" + std::to_string(i), "images/s.ppm", "depth/s.pgm", i % 2 ? "live" : "attack:replay_moire", "t"});
  check(parse_manifest(format_manifest(rows)) == rows, "manifest");
  ScoreSet scores;
  for (int i = 0; i < 30; ++i) {
    const double v = rng.uniform(-1, 1) * std::pow(10.0, static_cast<double>(rng.below(20)) - 10);
    if (i % 3) scores.add_attack("a" + std::to_string(i), v, i % 2 ? "print_lattice" : "replay_moire");
    else scores.add_live("l" + std::to_string(i), v);
  }
  write_scores_csv(scores, (dir / "s.csv").string());
  check(read_scores_csv((dir / "s.csv").string()) == scores, "score csv");

  // Identical seeds, identical bytes.
  pipeline(dir / "run_a");
  pipeline(dir / "run_b");
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "run_a")) {
    if (!e.is_regular_file() || e.path().filename() == "resolved_config.txt") continue;
    const fs::path other = dir / "run_b" / fs::relative(e.path(), dir / "run_a");
    ++files;
    if (!fs::exists(other) || bytes_of(e.path()) != bytes_of(other)) failures.push_back(fs::relative(e.path(), dir).string());
  }
  fs::remove_all(dir);
  std::string d = fmt("5 formats round-trip; two same-seed pipelines compared over %.0f files", static_cast<double>(files));
  for (const auto& f : failures) d += "; mismatch: " + f;
  return {failures.empty() && files > 0, d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"operator equivalence", operator_equivalence},
      {"theta=0 degeneracy", degeneracy},
      {"gradient oracle", gradient_oracle},
      {"parameter count", parameter_count},
      {"metric oracles", metric_oracles},
      {"desk-scale training", desk_training},
      {"CDC benefit under domain shift", domain_shift},
      {"NAS structural acceptance", nas_structure},
      {"supernet-discrete consistency", supernet_consistency},
      {"format round-trips", round_trips},
  };
  std::set<std::size_t> only;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--only") {
      std::stringstream ss(argv[i + 1]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoul(tok));
    }

  int failed = 0;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto wall = std::chrono::steady_clock::now();
    std::printf("[%zu] %s ...\n", i + 1, criteria[i].first.c_str());
    std::fflush(stdout);
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
    char line[1024];
    std::snprintf(line, sizeof line, "%s criterion %zu (%s): %s [%.0fs]", o.pass ? "PASS" : "FAIL", i + 1,
                  criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::printf("%s\n", line);
    std::fflush(stdout);
    lines.push_back(line);
    failed += !o.pass;
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%d of %zu criteria failed\n", failed, lines.size());
  return failed ? 1 : 0;
}
