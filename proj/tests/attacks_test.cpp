#include <gtest/gtest.h>

#include <cmath>

#include "advbench/attacks.hpp"
#include "advbench/net.hpp"
#include "oracles.hpp"

using namespace advbench;
namespace at = advbench::testing;

namespace {

Model dense_model(std::size_t in, Tensor weight, Tensor bias) {
  Model m;
  m.in_channels = in;
  m.in_height = 1;
  m.in_width = 1;
  m.num_classes = weight.shape()[0];
  Layer layer;
  layer.kind = LayerKind::Dense;
  layer.weight = std::move(weight);
  layer.bias = std::move(bias);
  m.layers.push_back(std::move(layer));
  return m;
}

Model identity2_model() {
  return dense_model(2, Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0}), Tensor({2}));
}

Tensor random_image(SplitMix64& rng, std::size_t c = 1, std::size_t h = 8,
                    std::size_t w = 8) {
  Tensor x({c, h, w});
  for (double& v : x.values()) v = rng.next_double();
  return x;
}

}  // namespace

TEST(Fgsm, ZeroBudgetLeavesInputUnchanged) {
  Model m = identity2_model();
  Tensor x = Tensor::vector({0.2, 0.8});  // predicted class 1
  AttackSpec spec = attack_preset(AttackFamily::Fgsm, PresetKind::PaperDefault);
  spec.eps = 0.0;
  SplitMix64 rng(70);
  AttackOutcome out = fgsm(m, x, spec, rng);
  EXPECT_EQ(out.x_adv.values(), x.values());
  EXPECT_FALSE(out.success);
  EXPECT_EQ(out.perturbation_linf, 0.0);
}

TEST(Fgsm, AnalyticSignStep) {
  Model m = identity2_model();
  Tensor x = Tensor::vector({0.5, 0.5});  // tie -> class 0, gradient (-0.5, 0.5)
  AttackSpec spec = attack_preset(AttackFamily::Fgsm, PresetKind::PaperDefault);
  spec.eps = 0.1;
  SplitMix64 rng(71);
  AttackOutcome out = fgsm(m, x, spec, rng);
  EXPECT_NEAR(out.x_adv[0], 0.4, 1e-12);
  EXPECT_NEAR(out.x_adv[1], 0.6, 1e-12);
  EXPECT_TRUE(out.success);
}

TEST(Fgsm, MaxNormBudgetHolds) {
  SplitMix64 model_rng(72);
  Model m = reference_model(4, model_rng);
  AttackSpec spec = attack_preset(AttackFamily::Fgsm, PresetKind::PaperManual);
  ASSERT_DOUBLE_EQ(spec.eps, 0.1);
  SplitMix64 rng(73);
  for (int i = 0; i < 100; ++i) {
    Tensor x = random_image(rng, 1, 28, 28);
    AttackOutcome out = fgsm(m, x, spec, rng);
    EXPECT_LE(out.perturbation_linf, spec.eps + 1e-12);
    for (double v : out.x_adv.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Fgsm, ZeroGradientUnderPNormReturnsInput) {
  Model m = identity2_model();
  for (Layer& layer : m.layers)
    for (double& v : layer.weight.values()) v = 0.0;
  Tensor x = Tensor::vector({0.3, 0.7});
  AttackSpec spec = attack_preset(AttackFamily::Fgsm, PresetKind::PaperDefault);
  spec.norm = NormKind::L2;
  SplitMix64 rng(74);
  AttackOutcome out = fgsm(m, x, spec, rng);
  EXPECT_EQ(out.x_adv.values(), x.values());
  EXPECT_FALSE(out.success);
}

TEST(Fgsm, MinimalModeStopsAtFirstFlip) {
  Model m = identity2_model();
  Tensor x = Tensor::vector({0.45, 0.55});  // class 1, margin 0.1
  AttackSpec spec = attack_preset(AttackFamily::Fgsm, PresetKind::PaperDefault);
  spec.minimal = true;
  spec.eps = 0.3;
  spec.eps_step = 0.02;
  SplitMix64 rng(75);
  AttackOutcome out = fgsm(m, x, spec, rng);
  EXPECT_TRUE(out.success);
  // Gradient pushes (+,-): flip needs just over 0.05 per coordinate; the
  // first succeeding step is 0.06 (three steps of 0.02).
  EXPECT_NEAR(out.perturbation_linf, 0.06, 1e-9);
  EXPECT_EQ(out.iterations_used, 3);
}

TEST(Bim, SingleStepReducesToFgsm) {
  SplitMix64 model_rng(76);
  Model m = reference_model(4, model_rng);
  SplitMix64 rng(77);
  for (int i = 0; i < 10; ++i) {
    Tensor x = random_image(rng, 1, 28, 28);
    AttackSpec fgsm_spec = attack_preset(AttackFamily::Fgsm, PresetKind::PaperDefault);
    fgsm_spec.eps = 0.07;
    AttackSpec bim_spec = attack_preset(AttackFamily::Bim, PresetKind::PaperDefault);
    bim_spec.eps = 0.07;
    bim_spec.eps_step = 0.07;
    bim_spec.max_iter = 1;
    SplitMix64 r1(1), r2(1);
    AttackOutcome a = fgsm(m, x, fgsm_spec, r1);
    AttackOutcome b = bim(m, x, bim_spec, r2);
    ASSERT_EQ(a.x_adv.values(), b.x_adv.values());
    EXPECT_EQ(a.success, b.success);
  }
}

TEST(Bim, BallInvariantAndEarlyStop) {
  SplitMix64 model_rng(78);
  Model m = reference_model(4, model_rng);
  AttackSpec spec = attack_preset(AttackFamily::Bim, PresetKind::PaperManual);
  ASSERT_DOUBLE_EQ(spec.eps, 0.1);
  ASSERT_DOUBLE_EQ(spec.eps_step, 0.05);
  SplitMix64 rng(79);
  for (int i = 0; i < 20; ++i) {
    Tensor x = random_image(rng, 1, 28, 28);
    AttackOutcome out = bim(m, x, spec, rng);
    EXPECT_LE(out.perturbation_linf, spec.eps + 1e-12);
    EXPECT_LE(out.iterations_used, spec.max_iter);
    EXPECT_EQ(out.success, predict(m, out.x_adv) != predict(m, x));
  }
}

TEST(Pgd, PlainSettingsReduceToBim) {
  SplitMix64 model_rng(80);
  Model m = reference_model(4, model_rng);
  AttackSpec bim_spec = attack_preset(AttackFamily::Bim, PresetKind::PaperManual);
  AttackSpec pgd_spec = attack_preset(AttackFamily::Pgd, PresetKind::PaperManual);
  pgd_spec.eps = bim_spec.eps;
  pgd_spec.eps_step = bim_spec.eps_step;
  pgd_spec.max_iter = bim_spec.max_iter;
  pgd_spec.num_random_init = 0;
  pgd_spec.decay.reset();
  SplitMix64 rng(81);
  for (int i = 0; i < 10; ++i) {
    Tensor x = random_image(rng, 1, 28, 28);
    SplitMix64 r1(1), r2(1);
    AttackOutcome a = bim(m, x, bim_spec, r1);
    AttackOutcome b = pgd(m, x, pgd_spec, r2);
    ASSERT_EQ(a.x_adv.values(), b.x_adv.values());
  }
}

TEST(Pgd, L2BallProjection) {
  SplitMix64 model_rng(82);
  Model m = reference_model(4, model_rng);
  AttackSpec spec = attack_preset(AttackFamily::Pgd, PresetKind::PaperDefault);
  spec.norm = NormKind::L2;
  spec.eps = 1.5;
  spec.eps_step = 0.5;
  spec.max_iter = 20;
  spec.num_random_init = 1;
  SplitMix64 rng(83);
  for (int i = 0; i < 10; ++i) {
    Tensor x = random_image(rng, 1, 28, 28);
    AttackOutcome out = pgd(m, x, spec, rng);
    EXPECT_LE(out.perturbation_l2, spec.eps + 1e-9);
  }
}

TEST(Pgd, MomentumAndRandomEpsStayInBudget) {
  SplitMix64 model_rng(84);
  Model m = reference_model(4, model_rng);
  AttackSpec spec = attack_preset(AttackFamily::Pgd, PresetKind::PaperManual);
  spec.decay = 0.9;
  spec.random_eps = true;
  spec.max_iter = 10;
  SplitMix64 rng(85);
  for (int i = 0; i < 10; ++i) {
    Tensor x = random_image(rng, 1, 28, 28);
    AttackOutcome out = pgd(m, x, spec, rng);
    EXPECT_LE(out.perturbation_linf, spec.eps + 1e-12);
  }
}

TEST(Pgd, RandomStartsStayInBall) {
  SplitMix64 model_rng(86);
  Model m = reference_model(4, model_rng);
  AttackSpec spec = attack_preset(AttackFamily::Pgd, PresetKind::PaperManual);
  spec.num_random_init = 3;
  spec.max_iter = 5;
  SplitMix64 rng(87);
  Tensor x = random_image(rng, 1, 28, 28);
  AttackOutcome out = pgd(m, x, spec, rng);
  EXPECT_LE(out.perturbation_linf, spec.eps + 1e-12);
}

TEST(Deepfool, AffineClosedFormInterior) {
  Model m = dense_model(2, Tensor({2, 2}, {3.0, 4.0, 0.0, 0.0}),
                        Tensor({2}, {-2.5, 0.0}));
  Tensor x = Tensor::vector({0.5, 0.5});  // z = (1.0, 0.0)
  AttackSpec spec = attack_preset(AttackFamily::Deepfool, PresetKind::PaperDefault);
  spec.epsilon = 0.0;
  spec.nb_grads = 2;
  SplitMix64 rng(88);
  AttackOutcome out = deepfool(m, x, spec, rng);
  // r = -(|f| + 1e-4) * w / |w|^2 with f = -1, w = (3,4).
  EXPECT_NEAR(out.x_adv[0], 0.5 - 1.0001 * 3.0 / 25.0, 5e-4);
  EXPECT_NEAR(out.x_adv[1], 0.5 - 1.0001 * 4.0 / 25.0, 5e-4);
  EXPECT_EQ(out.iterations_used, 1);
  EXPECT_TRUE(out.success);
}

TEST(Deepfool, AffineThroughOriginClipsToBox) {
  Model m = dense_model(2, Tensor({2, 2}, {3.0, 4.0, 0.0, 0.0}), Tensor({2}));
  Tensor x = Tensor::vector({1.0, 0.0});
  AttackSpec spec = attack_preset(AttackFamily::Deepfool, PresetKind::PaperDefault);
  spec.epsilon = 0.0;
  spec.nb_grads = 2;
  SplitMix64 rng(89);
  AttackOutcome out = deepfool(m, x, spec, rng);
  // Unclipped step is -(3/25)*(3,4) = (-0.36, -0.48); the second coordinate
  // clips to the box.
  EXPECT_NEAR(out.x_adv[0], 0.64, 1e-3);
  EXPECT_EQ(out.x_adv[1], 0.0);
  EXPECT_EQ(out.iterations_used, 1);
}

TEST(Deepfool, AlreadyMisclassifiedIsTrivialSuccess) {
  SplitMix64 model_rng(90);
  Model m = reference_model(4, model_rng);
  SplitMix64 rng(91);
  Tensor x = random_image(rng, 1, 28, 28);
  int clean = predict(m, x);
  int other = (clean + 1) % 4;
  AttackSpec spec = attack_preset(AttackFamily::Deepfool, PresetKind::PaperDefault);
  AttackOutcome out = deepfool(m, x, spec, rng, other);
  EXPECT_TRUE(out.success);
  EXPECT_EQ(out.iterations_used, 0);
  EXPECT_EQ(out.perturbation_l2, 0.0);
  EXPECT_EQ(out.x_adv.values(), x.values());
}

TEST(Deepfool, DegenerateHyperplanesAbortCleanly) {
  Model m = dense_model(2, Tensor({2, 2}), Tensor({2}));  // all-zero weights
  Tensor x = Tensor::vector({0.4, 0.6});
  AttackSpec spec = attack_preset(AttackFamily::Deepfool, PresetKind::PaperDefault);
  SplitMix64 rng(92);
  AttackOutcome out = deepfool(m, x, spec, rng);
  EXPECT_FALSE(out.success);
  EXPECT_EQ(out.x_adv.values(), x.values());
}

TEST(CwSchedule, GrowsTenfoldUntilFirstSuccess) {
  CwConstSchedule schedule(0.01);
  std::vector<double> used;
  for (int round = 0; round < 3; ++round) {
    used.push_back(schedule.current());
    schedule.report(false);
  }
  ASSERT_EQ(used.size(), 3u);
  EXPECT_DOUBLE_EQ(used[0], 0.01);
  EXPECT_DOUBLE_EQ(used[1], 0.1);
  EXPECT_DOUBLE_EQ(used[2], 1.0);
}

TEST(CwSchedule, BisectsAfterSuccess) {
  CwConstSchedule schedule(0.01);
  schedule.report(false);  // fail at 0.01
  schedule.report(false);  // fail at 0.1
  EXPECT_DOUBLE_EQ(schedule.current(), 1.0);
  schedule.report(true);  // success at 1.0
  EXPECT_DOUBLE_EQ(schedule.current(), 0.55);  // (0.1 + 1.0) / 2
  schedule.report(false);
  EXPECT_DOUBLE_EQ(schedule.current(), 0.775);  // (0.55 + 1.0) / 2
  schedule.report(true);
  EXPECT_DOUBLE_EQ(schedule.current(), 0.6625);  // (0.55 + 0.775) / 2
}

TEST(CwSchedule, CapsAtUpperBound) {
  CwConstSchedule schedule(1e9);
  schedule.report(false);
  EXPECT_DOUBLE_EQ(schedule.current(), 1e10);
  schedule.report(false);
  EXPECT_DOUBLE_EQ(schedule.current(), 1e10);
}

TEST(CwL2, AlreadyMisclassifiedIsZeroPerturbationSuccess) {
  SplitMix64 model_rng(93);
  Model m = reference_model(4, model_rng);
  SplitMix64 rng(94);
  Tensor x = random_image(rng, 1, 28, 28);
  int other = (predict(m, x) + 1) % 4;
  AttackSpec spec = attack_preset(AttackFamily::CwL2, PresetKind::PaperDefault);
  AttackOutcome out = cw_l2(m, x, spec, rng, other);
  EXPECT_TRUE(out.success);
  EXPECT_EQ(out.perturbation_l2, 0.0);
  EXPECT_EQ(out.x_adv.values(), x.values());
}

TEST(CwL2, FindsSmallFlipOnMarginCase) {
  Model m = identity2_model();
  Tensor x = Tensor::vector({0.6, 0.4});
  AttackSpec spec = attack_preset(AttackFamily::CwL2, PresetKind::PaperDefault);
  spec.max_iter = 50;
  spec.binary_search_steps = 6;
  SplitMix64 rng(95);
  AttackOutcome out = cw_l2(m, x, spec, rng);
  EXPECT_TRUE(out.success);
  EXPECT_LT(out.perturbation_l2, 0.5);
  for (double v : out.x_adv.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Simba, ConstantClassifierAcceptsNothing) {
  // Zero weights: identical probabilities for every query.
  at::LinearStubClassifier stub(Tensor({3, 16}), Tensor({3}));
  Tensor x({1, 4, 4});
  for (double& v : x.values()) v = 0.5;
  AttackSpec spec = attack_preset(AttackFamily::Simba, PresetKind::PaperDefault);
  spec.basis = SimbaBasis::Px;
  spec.max_iter = 40;
  SplitMix64 rng(96);
  AttackOutcome out = simba(stub, x, spec, rng);
  EXPECT_FALSE(out.success);
  EXPECT_EQ(out.x_adv.values(), x.values());
  EXPECT_TRUE(out.objective_trace.empty());
  EXPECT_GT(out.queries_used, 0);
}

TEST(Simba, PxStepsChangeExactlyOnePixel) {
  SplitMix64 weight_rng(97);
  Tensor w({3, 36});
  for (double& v : w.values()) v = weight_rng.uniform(-1.0, 1.0);
  at::LinearStubClassifier stub(std::move(w), Tensor({3}));
  Tensor x({1, 6, 6});
  for (double& v : x.values()) v = weight_rng.uniform(0.3, 0.7);

  AttackSpec spec = attack_preset(AttackFamily::Simba, PresetKind::PaperDefault);
  spec.basis = SimbaBasis::Px;
  spec.epsilon = 0.1;  // interior pixels never clip
  spec.max_iter = 36;
  SplitMix64 rng(98);
  AttackOutcome out = simba(stub, x, spec, rng);

  // Each accepted step toggles exactly one pixel by +-epsilon, so every
  // pixel's total offset is a multiple of epsilon and the count of changed
  // pixels is at most the number of accepted steps.
  std::size_t changed = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double delta = out.x_adv[i] - x[i];
    if (delta != 0.0) ++changed;
    double steps = delta / spec.epsilon;
    EXPECT_NEAR(steps, std::round(steps), 1e-9);
  }
  EXPECT_LE(changed, out.objective_trace.size());
}

TEST(Simba, AcceptedProbabilitiesStrictlyDecrease) {
  SplitMix64 weight_rng(99);
  Tensor w({4, 64});
  for (double& v : w.values()) v = weight_rng.uniform(-1.0, 1.0);
  at::LinearStubClassifier stub(std::move(w), Tensor({4}));
  Tensor x({1, 8, 8});
  for (double& v : x.values()) v = weight_rng.next_double();

  AttackSpec spec = attack_preset(AttackFamily::Simba, PresetKind::PaperDefault);
  spec.basis = SimbaBasis::Dct;
  spec.freq_dim = 8;
  spec.max_iter = 200;
  SplitMix64 rng(100);
  int y_src = stub.predict(x);
  AttackOutcome out = simba(stub, x, spec, rng);

  ASSERT_FALSE(out.objective_trace.empty());
  for (std::size_t i = 1; i < out.objective_trace.size(); ++i)
    EXPECT_LT(out.objective_trace[i], out.objective_trace[i - 1]);
  // The last accepted probability is independently reproducible from x_adv.
  Tensor final_probs = stub.class_probabilities(out.x_adv);
  EXPECT_NEAR(final_probs[static_cast<std::size_t>(y_src)],
              out.objective_trace.back(), 1e-12);
}

TEST(Simba, DiagOrderVisitsLowFrequenciesFirst) {
  // With a single antidiagonal sweep and one accepted step the perturbation
  // must live in the low-frequency atoms; just exercise the path.
  SplitMix64 weight_rng(101);
  Tensor w({2, 64});
  for (double& v : w.values()) v = weight_rng.uniform(-1.0, 1.0);
  at::LinearStubClassifier stub(std::move(w), Tensor({2}));
  Tensor x({1, 8, 8});
  for (double& v : x.values()) v = weight_rng.next_double();
  AttackSpec spec = attack_preset(AttackFamily::Simba, PresetKind::PaperDefault);
  spec.order = SimbaOrder::Diag;
  spec.max_iter = 32;
  SplitMix64 rng(102);
  AttackOutcome out = simba(stub, x, spec, rng);
  EXPECT_LE(out.iterations_used, 32);
}

TEST(PixelAttack, RejectsCmaes) {
  at::LinearStubClassifier stub(Tensor({2, 4}), Tensor({2}));
  Tensor x({1, 2, 2});
  AttackSpec spec = attack_preset(AttackFamily::Pixel, PresetKind::PaperDefault);
  spec.es = 0;
  SplitMix64 rng(103);
  EXPECT_THROW(pixel_attack(stub, x, spec, rng), std::invalid_argument);
}

TEST(PixelAttack, FindsThePixelTheOracleFinds) {
  // z1 = 4 * x[3,3] - 3.5: flips only when pixel (3,3) goes above 0.875.
  Tensor w({2, 64});
  w[64 + 3 * 8 + 3] = 4.0;
  at::LinearStubClassifier stub(std::move(w), Tensor({2}, {0.0, -3.5}));
  Tensor x({1, 8, 8});
  for (double& v : x.values()) v = 0.2;

  auto flips = at::brute_force_single_pixel_flips(stub, x);
  ASSERT_EQ(flips.size(), 1u);
  EXPECT_EQ(flips[0].row, 3u);
  EXPECT_EQ(flips[0].col, 3u);
  EXPECT_EQ(flips[0].value, 1.0);

  AttackSpec spec = attack_preset(AttackFamily::Pixel, PresetKind::PaperDefault);
  spec.th = 1;
  spec.max_iter = 120;
  SplitMix64 rng(104);
  AttackOutcome out = pixel_attack(stub, x, spec, rng);
  EXPECT_TRUE(out.success);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (out.x_adv[i] != x[i]) ++changed;
  EXPECT_EQ(changed, 1u);
  EXPECT_NE(out.x_adv.at(0, 3, 3), x.at(0, 3, 3));
  EXPECT_GT(out.x_adv.at(0, 3, 3), 0.875);
}

TEST(PixelAttack, ModifiedPixelCountBoundedByThreshold) {
  SplitMix64 weight_rng(105);
  Tensor w({3, 64});
  for (double& v : w.values()) v = weight_rng.uniform(-1.0, 1.0);
  at::LinearStubClassifier stub(std::move(w), Tensor({3}));
  Tensor x({1, 8, 8});
  for (double& v : x.values()) v = weight_rng.next_double();
  for (int th : {1, 3, 5}) {
    AttackSpec spec = attack_preset(AttackFamily::Pixel, PresetKind::PaperDefault);
    spec.th = th;
    spec.max_iter = 5;
    SplitMix64 rng(106);
    AttackOutcome out = pixel_attack(stub, x, spec, rng);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (out.x_adv[i] != x[i]) ++changed;
    EXPECT_LE(changed, static_cast<std::size_t>(th));
  }
}

TEST(PixelAttack, DeterministicForFixedSeed) {
  SplitMix64 weight_rng(107);
  Tensor w({3, 64});
  for (double& v : w.values()) v = weight_rng.uniform(-1.0, 1.0);
  at::LinearStubClassifier stub(std::move(w), Tensor({3}));
  Tensor x({1, 8, 8});
  for (double& v : x.values()) v = weight_rng.next_double();
  AttackSpec spec = attack_preset(AttackFamily::Pixel, PresetKind::PaperDefault);
  spec.max_iter = 4;
  SplitMix64 r1(108), r2(108);
  AttackOutcome a = pixel_attack(stub, x, spec, r1);
  AttackOutcome b = pixel_attack(stub, x, spec, r2);
  EXPECT_EQ(a.x_adv.values(), b.x_adv.values());
  EXPECT_EQ(a.queries_used, b.queries_used);
}

TEST(BlackBox, OnlyQueriesNeverGradients) {
  SplitMix64 weight_rng(109);
  Tensor w({3, 36});
  for (double& v : w.values()) v = weight_rng.uniform(-1.0, 1.0);
  at::LinearStubClassifier stub(std::move(w), Tensor({3}));
  Tensor x({1, 6, 6});
  for (double& v : x.values()) v = weight_rng.next_double();

  std::uint64_t before = gradient_call_count();
  AttackSpec simba_spec = attack_preset(AttackFamily::Simba, PresetKind::PaperDefault);
  simba_spec.basis = SimbaBasis::Px;
  simba_spec.max_iter = 30;
  AttackSpec pixel_spec = attack_preset(AttackFamily::Pixel, PresetKind::PaperDefault);
  pixel_spec.max_iter = 3;
  pixel_spec.th = 1;
  SplitMix64 rng(110);
  AttackOutcome s = simba(stub, x, simba_spec, rng);
  AttackOutcome p = pixel_attack(stub, x, pixel_spec, rng);
  EXPECT_EQ(gradient_call_count(), before);
  EXPECT_GT(s.queries_used, 0);
  EXPECT_GT(p.queries_used, 0);
  EXPECT_EQ(stub.queries, s.queries_used + p.queries_used);
}

TEST(RunAttack, DispatchesAndKeepsSuccessFlagConsistent) {
  SplitMix64 model_rng(111);
  Model m = reference_model(4, model_rng);
  SplitMix64 img_rng(112);
  Tensor x = random_image(img_rng, 1, 28, 28);
  int clean = predict(m, x);
  for (AttackFamily family :
       {AttackFamily::Fgsm, AttackFamily::Bim, AttackFamily::Pgd,
        AttackFamily::Deepfool, AttackFamily::CwL2, AttackFamily::Simba,
        AttackFamily::Pixel}) {
    AttackSpec spec = attack_preset(family, PresetKind::PaperDefault);
    // Keep the slow families quick; this test checks dispatch, not potency.
    spec.max_iter = std::min(spec.max_iter, 30);
    if (family == AttackFamily::CwL2) spec.binary_search_steps = 2;
    if (family == AttackFamily::Pixel) spec.th = 1;
    SplitMix64 rng(113);
    AttackOutcome out = run_attack(m, x, spec, rng);
    EXPECT_EQ(out.success, predict(m, out.x_adv) != clean)
        << attack_family_name(family);
    for (double v : out.x_adv.values()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Presets, MatchPublishedTables) {
  AttackSpec fgsm_m = attack_preset(AttackFamily::Fgsm, PresetKind::PaperManual);
  EXPECT_DOUBLE_EQ(fgsm_m.eps, 0.1);
  EXPECT_DOUBLE_EQ(fgsm_m.eps_step, 0.0005);
  AttackSpec fgsm_d = attack_preset(AttackFamily::Fgsm, PresetKind::PaperDefault);
  EXPECT_DOUBLE_EQ(fgsm_d.eps, 0.3);

  AttackSpec bim_m = attack_preset(AttackFamily::Bim, PresetKind::PaperManual);
  EXPECT_DOUBLE_EQ(bim_m.eps, 0.1);
  EXPECT_DOUBLE_EQ(bim_m.eps_step, 0.05);
  EXPECT_EQ(bim_m.max_iter, 100);

  AttackSpec pgd_m = attack_preset(AttackFamily::Pgd, PresetKind::PaperManual);
  EXPECT_DOUBLE_EQ(pgd_m.eps, 0.1);
  EXPECT_DOUBLE_EQ(pgd_m.eps_step, 0.1);

  AttackSpec cw_m = attack_preset(AttackFamily::CwL2, PresetKind::PaperManual);
  EXPECT_EQ(cw_m.binary_search_steps, 20);
  EXPECT_DOUBLE_EQ(cw_m.initial_const, 0.1);
  EXPECT_EQ(cw_m.max_iter, 10);

  AttackSpec pixel_m = attack_preset(AttackFamily::Pixel, PresetKind::PaperManual);
  EXPECT_EQ(pixel_m.max_iter, 10);
  EXPECT_FALSE(pixel_m.th.has_value());
  EXPECT_EQ(pixel_m.es, 1);

  AttackSpec simba_m = attack_preset(AttackFamily::Simba, PresetKind::PaperManual);
  EXPECT_DOUBLE_EQ(simba_m.epsilon, 0.125);
  EXPECT_EQ(simba_m.max_iter, 3000);
  EXPECT_EQ(simba_m.freq_dim, 4);

  AttackSpec df_m = attack_preset(AttackFamily::Deepfool, PresetKind::PaperManual);
  EXPECT_EQ(df_m.max_iter, 500);
  EXPECT_DOUBLE_EQ(df_m.epsilon, 1e-100);
  EXPECT_EQ(df_m.nb_grads, 10);
}
