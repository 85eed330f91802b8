#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "cdcnet/nets/cdcn.hpp"
#include "cdcnet/nets/cdcnpp.hpp"
#include "cdcnet/nets/layers.hpp"
#include "cdcnet/nets/model_io.hpp"
#include "cdcnet/tensor/gradcheck.hpp"
#include "test_support.hpp"

using namespace cdcnet;
using cdcnet::testing::random_param;
using cdcnet::testing::random_projection;
using cdcnet::testing::random_tensor;

namespace {

Genotype chain_genotype() {
  Genotype g;
  for (int k = 0; k < 3; ++k) {
    CellGenotype c;
    c.nodes = {{0, "cdc_single"}, {1, "skip_connect"}, {0, "cdc_2_2"}, {3, "cdc_2_0.5"}};
    c.output = k == 1 ? 2 : 4;
    g.cells.push_back(c);
  }
  return g;
}

BackboneConfig small_backbone() {
  BackboneConfig b = CdcnPlusPlus<float>::default_config();
  b.input_size = 32;
  b.channel_scale = 1.0 / 16;
  return b;
}

}  // namespace

TEST(Cdcn, FullScaleParameterCount) {
  CdcnConfig c;
  Cdcn<float> vanilla(CdcnConfig{256, 1.0, FixedTheta{0.0}, false});
  Cdcn<float> cdc(c);
  EXPECT_EQ(cdc.conv_parameter_count(), 2241792u);
  EXPECT_EQ(vanilla.conv_parameter_count(), cdc.conv_parameter_count());
  EXPECT_EQ(vanilla.state().parameter_count(), cdc.state().parameter_count());
  const double rel = std::abs(static_cast<double>(cdc.conv_parameter_count()) - 2.25e6) / 2.25e6;
  EXPECT_LE(rel, 0.05);
}

TEST(Cdcn, AdaptiveThetaAddsOneParameterPerLayer) {
  CdcnConfig fixed = CdcnConfig::desk(), adaptive = fixed;
  adaptive.theta_mode = AdaptiveTheta{};
  Cdcn<float> a(fixed), b(adaptive);
  // stem + 9 block layers + 3 head layers
  EXPECT_EQ(b.state().trainable().size(), a.state().trainable().size() + 13);
  EXPECT_EQ(b.conv_parameter_count(), a.conv_parameter_count());
}

TEST(Cdcn, DeskShapesAndFiniteOutputOnZeroInput) {
  for (bool mafm : {false, true}) {
    CdcnConfig c = CdcnConfig::desk();
    c.use_mafm = mafm;
    Cdcn<float> net(c);
    Rng rng(1);
    net.init(rng);
    Tensor<float> zeros(Shape{2, 3, 64, 64});
    Tape<float> tape;
    Var<float> out = net.forward(tape, tape.constant(zeros), Mode::train);
    EXPECT_EQ(out.shape(), (Shape{2, 1, 8, 8}));
    for (float v : out.value().data()) EXPECT_TRUE(std::isfinite(v));
    for (float v : net.predict(zeros).data()) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Cdcn, RejectsWrongInput) {
  Cdcn<float> net(CdcnConfig::desk());
  EXPECT_THROW(net.predict(Tensor<float>(Shape{1, 3, 32, 32})), ShapeError);
  EXPECT_THROW(net.predict(Tensor<float>(Shape{1, 1, 64, 64})), ShapeError);
  EXPECT_THROW(Cdcn<float>(CdcnConfig{60, 0.25, FixedTheta{}, false}), ConfigError);
  EXPECT_THROW(Cdcn<float>(CdcnConfig{64, 0.001, FixedTheta{}, false}), ConfigError);
}

TEST(Cdcn, StateNamesAreUnique) {
  CdcnConfig c = CdcnConfig::desk();
  c.use_mafm = true;
  Cdcn<float> net(c);
  const auto s = net.state();
  std::set<std::string> names;
  for (auto* p : s.params) EXPECT_TRUE(names.insert(p->name).second) << p->name;
  for (const auto& [n, t] : s.buffers) EXPECT_TRUE(names.insert(n).second) << n;
  EXPECT_TRUE(names.count("stem.conv.weight"));
  EXPECT_TRUE(names.count("block3.2.bn.running_var"));
  EXPECT_TRUE(names.count("mafm.low.weight"));
}

TEST(Cdcn, InferScoreIsMeanDepth) {
  Cdcn<float> net(CdcnConfig::desk());
  Rng rng(2);
  net.init(rng);
  auto img = random_tensor<float>(Shape{1, 3, 64, 64}, rng, 0, 1);
  const Tensor<float> depth = net.predict(img);
  double mean = 0;
  for (float v : depth.data()) mean += v;
  mean /= static_cast<double>(depth.numel());
  EXPECT_NEAR(infer_score(net, img), mean, 1e-6);
  EXPECT_THROW(infer_score(net, Tensor<float>(Shape{2, 3, 64, 64})), ShapeError);
}

TEST(Fuse, ConcatenatesInOrderAndChecksExtent) {
  Rng rng(3);
  Tape<double> tape(false);
  auto a = tape.constant(random_tensor<double>(Shape{1, 2, 3, 3}, rng));
  auto b = tape.constant(random_tensor<double>(Shape{1, 1, 3, 3}, rng));
  auto c = tape.constant(random_tensor<double>(Shape{1, 3, 3, 3}, rng));
  const Tensor<double> f = multi_level_fuse(a, b, c).value();
  ASSERT_EQ(f.shape(), (Shape{1, 6, 3, 3}));
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(f[i], a.value()[i]);
    EXPECT_EQ(f[2 * 9 + i], b.value()[i]);
    EXPECT_EQ(f[5 * 9 + i], c.value()[2 * 9 + i]);
  }
  auto bad = tape.constant(Tensor<double>(Shape{1, 1, 2, 3}));
  EXPECT_THROW(multi_level_fuse(a, b, bad), ShapeError);
}

TEST(Fuse, GradientIsARouting) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_param<double>("a", Shape{2, 1, 3, 3}, rng);
    auto b = random_param<double>("b", Shape{2, 2, 3, 3}, rng);
    auto c = random_param<double>("c", Shape{2, 1, 3, 3}, rng);
    auto rep = finite_difference_check(
        [&](Tape<double>& t) { return random_projection(multi_level_fuse(t.watch(a), t.watch(b), t.watch(c)), trial); },
        {&a, &b, &c});
    EXPECT_LE(rep.max_rel_error, 1e-4) << rep.worst;
  }
}

TEST(Mafm, ZeroWeightsHalveTheFeatures) {
  Mafm<double> mafm("mafm");
  Rng rng(5);
  Tape<double> tape(false);
  auto lo = tape.constant(random_tensor<double>(Shape{2, 2, 4, 4}, rng));
  auto mid = tape.constant(random_tensor<double>(Shape{2, 2, 4, 4}, rng));
  auto hi = tape.constant(random_tensor<double>(Shape{2, 2, 4, 4}, rng));
  const Tensor<double> out = mafm.forward(tape, lo, mid, hi).value();
  const Tensor<double> cat = multi_level_fuse(lo, mid, hi).value();
  for (std::size_t i = 0; i < out.numel(); ++i) EXPECT_DOUBLE_EQ(out[i], 0.5 * cat[i]);
}

TEST(Mafm, AttentionUsesKernelsSevenFiveThree) {
  Mafm<double> mafm("mafm");
  EXPECT_EQ(mafm.weight(0).value.shape(), (Shape{1, 2, 7, 7}));
  EXPECT_EQ(mafm.weight(1).value.shape(), (Shape{1, 2, 5, 5}));
  EXPECT_EQ(mafm.weight(2).value.shape(), (Shape{1, 2, 3, 3}));
  Rng rng(6);
  mafm.init(rng);
  Tape<double> tape(false);
  auto x = tape.constant(random_tensor<double>(Shape{1, 3, 6, 6}, rng, -5, 5));
  for (std::size_t l = 0; l < 3; ++l) {
    const Tensor<double> att = mafm.attention(tape, l, x).value();
    EXPECT_EQ(att.shape(), (Shape{1, 1, 6, 6}));
    for (double v : att.data()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(Mafm, GradientsMatchFiniteDifferences) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Mafm<double> mafm("mafm");
    mafm.init(rng);
    auto lo = random_param<double>("lo", Shape{2, 2, 4, 4}, rng);
    auto mid = random_param<double>("mid", Shape{2, 2, 4, 4}, rng);
    auto hi = random_param<double>("hi", Shape{2, 2, 4, 4}, rng);
    auto rep = finite_difference_check(
        [&](Tape<double>& t) { return random_projection(mafm.forward(t, t.watch(lo), t.watch(mid), t.watch(hi)), trial); },
        {&lo, &mid, &hi, &mafm.weight(0), &mafm.weight(1), &mafm.weight(2)});
    EXPECT_LE(rep.max_rel_error, 1e-4) << rep.worst;
  }
}

TEST(CdcnPlusPlus, BuildsFromGenotypeWithDoubledWidth) {
  const BackboneConfig b = small_backbone();
  EXPECT_EQ(b.width_multiplier, 2.0);
  EXPECT_TRUE(b.use_mafm);
  EXPECT_EQ(b.cell_channels(), 16u);
  CdcnPlusPlus<float> net(chain_genotype(), b);
  Rng rng(8);
  net.init(rng);
  const Tensor<float> out = net.predict(random_tensor<float>(Shape{2, 3, 32, 32}, rng, 0, 1));
  EXPECT_EQ(out.shape(), (Shape{2, 1, 4, 4}));
  for (float v : out.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(CdcnPlusPlus, RejectsMismatchedGenotype) {
  Genotype two = chain_genotype();
  two.cells.pop_back();
  EXPECT_THROW(CdcnPlusPlus<float>(two, small_backbone()), ConfigError);
  Genotype none = chain_genotype();
  none.cells[0].nodes[0].op = "none";
  EXPECT_THROW(CdcnPlusPlus<float>(none, small_backbone()), ConfigError);
  BackboneConfig three = small_backbone();
  three.nodes = 3;
  EXPECT_THROW(CdcnPlusPlus<float>(chain_genotype(), three), ConfigError);
}

TEST(CdcnPlusPlus, UnusedNodesAreNotBuilt) {
  // Cell 2 outputs B2, so B3 and B4 (and their ops) must be absent.
  CdcnPlusPlus<float> net(chain_genotype(), small_backbone());
  for (auto* p : net.state().params) {
    EXPECT_EQ(p->name.find("cell2.e0_3"), std::string::npos) << p->name;
    EXPECT_EQ(p->name.find("cell2.e3_4"), std::string::npos) << p->name;
  }
}

TEST(ModelIo, CheckpointRoundTripReproducesPredictions) {
  const auto dir = std::filesystem::temp_directory_path() / "cdcnet_model_io";
  std::filesystem::create_directories(dir);
  Rng rng(9);
  const Tensor<float> img = random_tensor<float>(Shape{1, 3, 32, 32}, rng, 0, 1);

  ModelSpec cdcn;
  cdcn.cdcn = CdcnConfig{32, 0.125, AdaptiveTheta{}, true};
  ModelSpec pp;
  pp.kind = ModelSpec::Kind::cdcnpp;
  pp.backbone = small_backbone();
  pp.backbone.theta_mode = FixedTheta{0.5};
  pp.genotype = chain_genotype();
  for (const ModelSpec& spec : {cdcn, pp}) {
    auto model = build_model(spec);
    model->init(rng);
    // Move the running statistics away from their initial values.
    Tape<float> tape(false);
    model->forward(tape, tape.constant(random_tensor<float>(Shape{2, 3, 32, 32}, rng, 0, 1)), Mode::train);
    const std::string path = (dir / "m.ckpt").string();
    save_model(path, spec, *model);
    LoadedModel back = load_model(path);
    EXPECT_EQ(model_header(back.spec), model_header(spec));
    EXPECT_TRUE(bitwise_equal(back.model->predict(img), model->predict(img)));
  }
}

TEST(ModelIo, RejectsForeignHeaders) {
  EXPECT_THROW(parse_model_header("{}"), DataError);
  EXPECT_THROW(parse_model_header("not json"), DataError);
  EXPECT_THROW(parse_model_header(R"({"format":"cdcnet-model","version":1,"model":"resnet"})"), DataError);
}
