#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cdcnet/harness/commands.hpp"
#include "cdcnet/metrics/metrics.hpp"
#include "cdcnet/nas/genotype.hpp"
#include "cdcnet/nas/search.hpp"

using namespace cdcnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cdcnet_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, double> read_metrics(const fs::path& p) {
  std::map<std::string, double> out;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

void run(const std::string& cmd, RunConfig cfg, const fs::path& out_dir) {
  cfg.set("output_dir", out_dir.string());
  std::ostringstream sink;
  run_command(cmd, cfg, sink, false);
}

template <class E>
std::string message_of(const std::string& text) {
  try {
    RunConfig::parse(text);
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(RunConfig, ParsesCommentsAndRoundTrips) {
  const RunConfig c = RunConfig::parse("# desk run\n\nepochs = 3   # short\n  lr=0.01\nmodel = cdcnpp\n");
  EXPECT_EQ(c.count("epochs"), 3u);
  EXPECT_DOUBLE_EQ(c.num("lr"), 0.01);
  EXPECT_EQ(c.str("model"), "cdcnpp");
  EXPECT_FALSE(c.has("seed"));
  const RunConfig back = RunConfig::parse(c.format());
  EXPECT_EQ(back.format(), c.format());
}

TEST(RunConfig, ErrorsNameTheLine) {
  EXPECT_NE(message_of<ConfigError>("epochs = 1\n\nlearning_rate = 3\n").find("line 3"), std::string::npos);
  EXPECT_NE(message_of<ConfigError>("epochs = 1\nepochs = 2\n").find("line 2"), std::string::npos);
  EXPECT_NE(message_of<ConfigError>("epochs\n").find("line 1"), std::string::npos);
  RunConfig c;
  EXPECT_THROW(c.set("not_a_key", "1"), ConfigError);
  c.set("epochs", "two");
  EXPECT_THROW(c.count("epochs"), ConfigError);
  c.set("lr", "-inf?");
  EXPECT_THROW(c.num("lr"), ConfigError);
}

TEST(RunConfig, PresetsFillUnsetKeys) {
  const RunConfig desk = RunConfig{}.resolved("train");
  EXPECT_EQ(desk.str("preset"), "desk");
  EXPECT_EQ(desk.count("input_size"), 64u);
  EXPECT_EQ(desk.str("metric_mode"), "dev-eer");

  RunConfig f;
  f.set("preset", "full");
  const RunConfig full = f.resolved("train");
  EXPECT_EQ(full.count("input_size"), 256u);
  EXPECT_EQ(full.count("epochs"), 1300u);
  EXPECT_EQ(full.count("batch_size"), 56u);
  EXPECT_DOUBLE_EQ(full.num("lr"), 1e-4);
  EXPECT_DOUBLE_EQ(full.num("weight_decay"), 5e-5);
  const RunConfig search = f.resolved("search");
  EXPECT_EQ(search.count("epochs"), 60u);
  EXPECT_EQ(search.count("batch_size"), 12u);
  EXPECT_DOUBLE_EQ(search.num("arch_lr"), 6e-4);
  EXPECT_DOUBLE_EQ(search.num("arch_weight_decay"), 1e-3);

  f.set("epochs", "7");
  EXPECT_EQ(f.resolved("train").count("epochs"), 7u);
  f.set("preset", "huge");
  EXPECT_THROW(f.resolved("train"), ConfigError);
}

TEST(Commands, ExitCodesFollowErrorKinds) {
  EXPECT_EQ(exit_code(ConfigError("x")), 2);
  EXPECT_EQ(exit_code(DataError("x")), 3);
  EXPECT_EQ(exit_code(ShapeError("x")), 3);
  EXPECT_EQ(exit_code(NumericError("x")), 4);
  EXPECT_EQ(exit_code(IoError("x")), 5);
  EXPECT_EQ(exit_code(std::runtime_error("x")), 1);
  EXPECT_EQ(error_line(DataError("bad row")), "error[data]: bad row");
  std::ostringstream sink;
  EXPECT_THROW(run_command("fly", RunConfig{}, sink, false), ConfigError);
}

TEST(Commands, EvalHandCaseFromScoreFiles) {
  const fs::path dir = scratch_dir("eval");
  ScoreSet s;
  s.add_live("l0", 0.9);
  s.add_live("l1", 0.3);
  s.add_attack("p0", 0.6, "print_lattice");
  s.add_attack("r0", 0.1, "replay_moire");
  write_scores_csv(s, (dir / "scores.csv").string());
  RunConfig c;
  c.set("scores", (dir / "scores.csv").string());
  c.set("metric_mode", "fixed-threshold");
  c.set("threshold", "0.5");
  run("eval", c, dir);
  auto m = read_metrics(dir / "metrics.csv");
  EXPECT_DOUBLE_EQ(m["apcer"], 1.0);
  EXPECT_DOUBLE_EQ(m["apcer:print_lattice"], 1.0);
  EXPECT_DOUBLE_EQ(m["apcer:replay_moire"], 0.0);
  EXPECT_DOUBLE_EQ(m["bpcer"], 0.5);
  EXPECT_DOUBLE_EQ(m["acer"], 0.75);
  EXPECT_DOUBLE_EQ(m["auc"], 0.75);
  EXPECT_NE(slurp(dir / "resolved_config.txt").find("threshold = 0.5"), std::string::npos);

  c.set("metric_mode", "dev-eer");
  EXPECT_THROW(run("eval", c, dir), ConfigError);
  c.set("dev_scores", (dir / "scores.csv").string());
  run("eval", c, dir);
  m = read_metrics(dir / "metrics.csv");
  EXPECT_DOUBLE_EQ(m["threshold"], eer(s).threshold);
  c.set("metric_mode", "best");
  EXPECT_THROW(run("eval", c, dir), ConfigError);
  c.set("metric_mode", "fixed-threshold");
  c.set("scores", (dir / "missing.csv").string());
  EXPECT_THROW(run("eval", c, dir), IoError);
}

TEST(Commands, GenTrainInferPipeline) {
  const fs::path dir = scratch_dir("pipeline");
  RunConfig g;
  g.set("live_count", "2");
  g.set("attack_count", "1");
  g.set("image_size", "32");
  run("gen", g, dir / "data");
  ASSERT_TRUE(fs::exists(dir / "data" / "manifest.csv"));

  RunConfig t;
  t.set("train_manifest", (dir / "data" / "manifest.csv").string());
  t.set("input_size", "32");
  t.set("channel_scale", "0.125");
  t.set("epochs", "0");
  run("train", t, dir / "train");
  ASSERT_TRUE(fs::exists(dir / "train" / "model.ckpt"));

  RunConfig i;
  i.set("checkpoint", (dir / "train" / "model.ckpt").string());
  i.set("test_manifest", (dir / "data" / "manifest.csv").string());
  run("infer", i, dir / "infer");
  const ScoreSet scores = read_scores_csv((dir / "infer" / "scores.csv").string());
  EXPECT_EQ(scores.entries.size(), 4u);
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "infer" / "depth"), fs::directory_iterator{}), 4);

  RunConfig bad = t;
  bad.set("input_size", "36");
  EXPECT_THROW(run("train", bad, dir / "bad"), ConfigError);
  i.set("test_manifest", (dir / "nope.csv").string());
  EXPECT_THROW(run("infer", i, dir / "infer"), IoError);
}

TEST(Commands, DeriveOnUniformArchitecture) {
  const fs::path dir = scratch_dir("derive");
  const OpCatalog cat = default_catalog();
  ArchParams<float> arch(cat.size(), 4);
  write_arch((dir / "arch.json").string(), arch, cat);
  RunConfig c;
  c.set("arch", (dir / "arch.json").string());
  run("derive", c, dir);
  const Genotype g = read_genotype((dir / "genotype.txt").string());
  ASSERT_EQ(g.cells.size(), 3u);
  for (const CellGenotype& cell : g.cells) {
    for (const NodeChoice& n : cell.nodes) EXPECT_EQ(n, (NodeChoice{0, "skip_connect"}));
    EXPECT_EQ(cell.output, 1u);
  }
}

TEST(Commands, GradcheckWritesOneRowPerCase) {
  const fs::path dir = scratch_dir("gradcheck");
  RunConfig c;
  c.set("gradcheck_trials", "1");
  run("gradcheck", c, dir);
  const std::string csv = slurp(dir / "gradcheck.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  EXPECT_EQ(csv.find(",0\n"), std::string::npos);
  c.set("gradcheck_tolerance", "0");
  EXPECT_THROW(run("gradcheck", c, dir), NumericError);
}
