#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "stpen/errors.hpp"
#include "stpen/grad_check.hpp"
#include "stpen/lstm.hpp"
#include "stpen/model.hpp"
#include "stpen/ops.hpp"
#include "stpen/perception.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace stpen {
namespace {

Var C(const Tensor& t) { return Var::constant(t); }

double l2(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Tensor frame_of(const Tensor& seq, std::size_t t) {
  const std::size_t n = seq.numel() / seq.dim(0);
  Shape s(seq.shape().begin() + 1, seq.shape().end());
  return Tensor(s, std::vector<double>(seq.storage().begin() + t * n, seq.storage().begin() + (t + 1) * n));
}

/// 3x3 kernel that passes channel i to channel i unchanged.
Tensor identity_kernel(std::size_t channels) {
  Tensor k = Tensor::zeros({channels, channels, 3, 3});
  for (std::size_t c = 0; c < channels; ++c) k.at({c, c, 1, 1}) = 1.0;
  return k;
}

DualRateSample random_sample(std::size_t actors, std::uint64_t seed, std::size_t side = 16) {
  Rng rng(seed);
  DualRateSample s;
  s.video_id = "v";
  s.timestamp_s = 3;
  s.frame_size = side;
  s.low = oracle::random_tensor({8, 3, side, side}, rng, 0, 1);
  s.high = oracle::random_tensor({16, 3, side, side}, rng, 0, 1);
  for (std::size_t a = 0; a < actors; ++a) {
    const double x = 0.1 * static_cast<double>(a % 4), y = 0.4 * static_cast<double>(a / 4);
    s.boxes.push_back(Box{x, y, x + 0.35, y + 0.5});
    s.actor_ids.push_back(static_cast<int>(a));
    Tensor t = Tensor::zeros({13});
    t[a % 13] = 1.0;
    s.targets.push_back(t);
    s.hidden.push_back(false);
  }
  return s;
}

// ---- FL-SAM -----------------------------------------------------------------

TEST(FlSam, ZeroParametersHalveInput) {
  Rng rng(1);
  const Tensor r = oracle::random_tensor({2, 3, 4, 4}, rng);
  const Tensor out = fl_sam(C(r), C(Tensor::zeros({1, 3, 3, 3})), C(Tensor::zeros({1}))).value();
  for (std::size_t i = 0; i < r.numel(); ++i) EXPECT_EQ(out[i], 0.5 * r[i]);
}

TEST(FlSam, SaturatedGatePassesInput) {
  Rng rng(2);
  const Tensor r = oracle::random_tensor({2, 3, 4, 4}, rng);
  const Tensor out = fl_sam(C(r), C(Tensor::zeros({1, 3, 3, 3})), C(Tensor::scalar(100.0))).value();
  EXPECT_LT(max_abs_diff(out, r), 1e-12);
}

TEST(FlSam, ScalarHandComputation) {
  Tensor w = Tensor::zeros({1, 1, 3, 3});
  w.at({0, 0, 1, 1}) = 1.0;
  Tensor gate;
  const Tensor out = fl_sam(C(Tensor::full({1, 1, 1, 1}, 2.0)), C(w), C(Tensor::zeros({1})), &gate).value();
  EXPECT_NEAR(gate[0], 0.880797, 1e-6);
  EXPECT_NEAR(out[0], 1.761594, 1e-6);
  EXPECT_EQ(gate.shape(), (Shape{1, 1, 1, 1}));
}

TEST(FlSam, BoundedByInputMagnitude) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor r = oracle::random_tensor({2, 4, 5, 5}, rng, -3, 3);
    const Tensor out =
        fl_sam(C(r), C(oracle::random_tensor({1, 4, 3, 3}, rng)), C(oracle::random_tensor({1}, rng))).value();
    for (std::size_t i = 0; i < r.numel(); ++i) EXPECT_LE(std::abs(out[i]), std::abs(r[i]));
  }
}

// ---- KMFEM ------------------------------------------------------------------

TEST(Kmfem, ConstantInputHasNoMotion) {
  Rng rng(4);
  const Tensor frame = oracle::random_tensor({1, 3, 4, 4}, rng);
  Tensor f({5, 3, 4, 4});
  for (std::size_t i = 0; i < f.numel(); ++i) f[i] = frame[i % frame.numel()];
  const Tensor out = kmfem(C(f), C(Tensor::zeros({1, 3, 3, 3})), C(Tensor::zeros({1})),
                           C(oracle::random_tensor({3, 3, 3, 3}, rng)))
                         .value();
  for (std::size_t i = 0; i < f.numel(); ++i) EXPECT_EQ(out[i], 0.5 * f[i]);
}

TEST(Kmfem, ConstantInputReducesToGatingTerm) {
  Rng rng(40);
  const Tensor frame = oracle::random_tensor({1, 3, 4, 4}, rng);
  Tensor f({6, 3, 4, 4});
  for (std::size_t i = 0; i < f.numel(); ++i) f[i] = frame[i % frame.numel()];
  const Tensor aw = oracle::random_tensor({1, 3, 3, 3}, rng), ab = oracle::random_tensor({1}, rng);
  const Tensor out = kmfem(C(f), C(aw), C(ab), C(oracle::random_tensor({3, 3, 3, 3}, rng))).value();
  EXPECT_EQ(out, fl_sam(C(f), C(aw), C(ab)).value());
}

TEST(Kmfem, ZeroParametersHalveInput) {
  Rng rng(5);
  const Tensor f = oracle::random_tensor({4, 2, 3, 3}, rng);
  const Tensor out = kmfem(C(f), C(Tensor::zeros({1, 2, 3, 3})), C(Tensor::zeros({1})),
                           C(Tensor::zeros({2, 2, 3, 3})))
                         .value();
  for (std::size_t i = 0; i < f.numel(); ++i) EXPECT_EQ(out[i], 0.5 * f[i]);
}

TEST(Kmfem, TwoFrameHandComputation) {
  const Tensor f({2, 1, 1, 1}, std::vector<double>{1.0, 3.0});
  const Tensor out = kmfem(C(f), C(Tensor::zeros({1, 1, 3, 3})), C(Tensor::zeros({1})), C(identity_kernel(1)))
                         .value();
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 2.5);
}

TEST(Kmfem, SingleFrameRejected) {
  EXPECT_THROW(kmfem(C(Tensor::zeros({1, 1, 2, 2})), C(Tensor::zeros({1, 1, 3, 3})), C(Tensor::zeros({1})),
                     C(identity_kernel(1))),
               ArgumentError);
}

// ---- residual blocks ----------------------------------------------------------

ParamSet block_params(std::size_t ci, std::size_t co, bool proj, Rng& rng, double scale = 1.0) {
  ParamSet ps;
  auto rnd = [&](Shape s) {
    Tensor t = oracle::random_tensor(std::move(s), rng);
    for (auto& v : t.storage()) v *= scale;
    return t;
  };
  ps.add("b.conv1.w", rnd({co, ci, 3, 3}));
  ps.add("b.conv1.b", rnd({co}));
  ps.add("b.conv2.w", rnd({co, co, 3, 3}));
  ps.add("b.conv2.b", rnd({co}));
  if (proj) {
    ps.add("b.proj.w", rnd({co, ci, 1, 1}));
    ps.add("b.proj.b", rnd({co}));
  }
  return ps;
}

Tensor relu_of(Tensor t) {
  for (auto& v : t.storage()) v = std::max(0.0, v);
  return t;
}

TEST(ResidualBlock, ZeroPathGivesRelu) {
  Rng rng(6);
  const ParamSet zeros = block_params(3, 3, false, rng, 0.0);
  const Tensor x = oracle::random_tensor({2, 3, 4, 4}, rng);
  EXPECT_EQ(residual_block(C(x), ParamBinding(zeros, false), "b", 1).value(), relu_of(x));
  EXPECT_EQ(residual_block(C(Tensor::zeros({1, 3, 4, 4})), ParamBinding(zeros, false), "b", 1).value(),
            Tensor::zeros({1, 3, 4, 4}));
}

TEST(ResidualBlock, StridedProjectionMatchesComposedOracle) {
  Rng rng(7);
  const ParamSet ps = block_params(2, 3, true, rng);
  const Tensor x = oracle::random_tensor({1, 2, 4, 4}, rng);
  const Tensor got = residual_block(C(x), ParamBinding(ps, false), "b", 2).value();
  Tensor h = relu_of(oracle::conv2d(x, ps.get("b.conv1.w"), ps.get("b.conv1.b"), 2, 1));
  h = oracle::conv2d(h, ps.get("b.conv2.w"), ps.get("b.conv2.b"), 1, 1);
  const Tensor sc = oracle::conv2d(x, ps.get("b.proj.w"), ps.get("b.proj.b"), 2, 0);
  Tensor want(h.shape());
  for (std::size_t i = 0; i < h.numel(); ++i) want[i] = std::max(0.0, h[i] + sc[i]);
  ASSERT_EQ(got.shape(), (Shape{1, 3, 2, 2}));
  EXPECT_LT(max_abs_diff(got, want), 1e-12);
}

TEST(ResidualBlock, ShapeChangeWithoutProjectionRejected) {
  Rng rng(8);
  const ParamSet ps = block_params(2, 3, false, rng);
  EXPECT_THROW(residual_block(C(Tensor::zeros({1, 2, 4, 4})), ParamBinding(ps, false), "b", 1), ConsistencyError);
}

// ---- branches -------------------------------------------------------------------

TEST(Branches, OutputShapes) {
  const ModelConfig cfg = desk_preset();
  const ParamSet ps = init_params(cfg, 1);
  ParamBinding bind(ps, false);
  const DualRateSample s = random_sample(1, 2);
  const std::size_t side = cfg.output_side();
  EXPECT_EQ(side, 2u);
  EXPECT_EQ(run_low_branch(C(s.low), bind, cfg).shape(), (Shape{8, 32, side, side}));
  EXPECT_EQ(run_high_branch(C(s.high), bind, cfg).shape(), (Shape{16, 32, side, side}));
}

Var plain_stack(const Var& clip, const ParamBinding& bind, const std::string& branch, const ModelConfig& cfg) {
  Var x = ops::conv2d(clip, bind[branch + ".stem.w"], bind[branch + ".stem.b"], cfg.branch.stem_stride, 1);
  if (!cfg.linear_mode) x = ops::relu(x);
  for (std::size_t b = 0; b < kNumBlocks; ++b) {
    x = residual_block(x, bind, branch + ".block" + std::to_string(b + 1), cfg.branch.block_strides[b],
                       cfg.linear_mode);
  }
  return x;
}

TEST(Branches, AblatedBranchesArePlainResidualStacks) {
  ModelConfig cfg = desk_preset();
  cfg.toggles.fl_sam = cfg.toggles.kmfem = false;
  const ParamSet ps = init_params(cfg, 3);
  ParamBinding bind(ps, false);
  const DualRateSample s = random_sample(1, 4);
  EXPECT_EQ(run_low_branch(C(s.low), bind, cfg).value(), plain_stack(C(s.low), bind, "low", cfg).value());
  EXPECT_EQ(run_high_branch(C(s.high), bind, cfg).value(), plain_stack(C(s.high), bind, "high", cfg).value());
}

TEST(Branches, LinearModeZeroGatesScaleByPowersOfHalf) {
  // Without relu and biases the stack is linear, so four 0.5 gates scale the
  // ablated output by 1/16 exactly.
  ModelConfig cfg = desk_preset();
  cfg.linear_mode = true;
  ParamSet full = init_params(cfg, 5);
  for (auto& [path, t] : full) {
    if (path.ends_with(".b") || path.find("fl_sam") != std::string::npos) t.fill(0.0);
  }
  ModelConfig ablated_cfg = cfg;
  ablated_cfg.toggles.fl_sam = false;
  const DualRateSample s = random_sample(1, 6);
  const Tensor gated = run_low_branch(C(s.low), ParamBinding(full, false), cfg).value();
  const Tensor plain = run_low_branch(C(s.low), ParamBinding(full, false), ablated_cfg).value();
  for (std::size_t i = 0; i < gated.numel(); ++i) EXPECT_EQ(gated[i], plain[i] / 16.0);
}

TEST(Branches, ConstantClipGivesIdenticalFrames) {
  ModelConfig cfg = desk_preset();
  ParamSet ps = init_params(cfg, 7);
  for (auto& [path, t] : ps) {
    if (path.find("kmfem") != std::string::npos) t.fill(0.0);
  }
  Rng rng(8);
  const Tensor frame = oracle::random_tensor({1, 3, 16, 16}, rng, 0, 1);
  Tensor clip({16, 3, 16, 16});
  for (std::size_t i = 0; i < clip.numel(); ++i) clip[i] = frame[i % frame.numel()];
  const Tensor out = run_high_branch(C(clip), ParamBinding(ps, false), cfg).value();
  const Tensor first = frame_of(out, 0);
  for (std::size_t t = 1; t < 16; ++t) EXPECT_EQ(frame_of(out, t), first) << t;
}

TEST(Branches, MotionPathActsOnlyWhereTheSquareMoves) {
  // A square that stays put for eight frames and then jumps. The motion path
  // adds nothing on static stretches, and each of the four modules carries
  // the jump one frame further.
  const ModelConfig cfg = desk_preset();
  const ParamSet ps = init_params(cfg, 9);
  ParamSet still = ps;
  for (auto& [path, t] : still)
    if (path.ends_with(".motion.w")) t.fill(0.0);
  Tensor clip = Tensor::full({16, 3, 16, 16}, 0.2);
  for (std::size_t t = 0; t < 16; ++t) {
    const std::size_t x0 = t < 8 ? 2 : 9;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 4; y < 10; ++y)
        for (std::size_t x = x0; x < x0 + 5; ++x) clip.at({t, c, y, x}) = 0.9;
  }
  const Tensor moving = run_high_branch(C(clip), ParamBinding(ps, false), cfg).value();
  const Tensor frozen = run_high_branch(C(clip), ParamBinding(still, false), cfg).value();
  for (std::size_t t = 0; t < 16; ++t) {
    const double gap = l2(frame_of(moving, t), frame_of(frozen, t));
    if (t >= 8 && t < 12) {
      EXPECT_GT(gap, 1e-3) << t;
    } else {
      EXPECT_EQ(gap, 0.0) << t;
    }
  }
}

// ---- fusion and cropping -----------------------------------------------------------

TEST(Fuse, IdentitiesAndOracle) {
  Rng rng(10);
  const Tensor low = oracle::random_tensor({8, 3, 2, 2}, rng);
  const Tensor high = oracle::random_tensor({16, 3, 2, 2}, rng);
  EXPECT_EQ(fuse_branches(C(low), C(Tensor::zeros({16, 3, 2, 2}))).value(), low);
  const Tensor sub = fuse_branches(C(Tensor::zeros({8, 3, 2, 2})), C(high)).value();
  for (std::size_t t = 0; t < 8; ++t) EXPECT_EQ(frame_of(sub, t), frame_of(high, 2 * t));
  const Tensor fused = fuse_branches(C(low), C(high)).value();
  for (std::size_t t = 0; t < 8; ++t)
    for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(fused[t * 12 + k], low[t * 12 + k] + high[2 * t * 12 + k]);
  EXPECT_THROW(fuse_branches(C(low), C(Tensor::zeros({16, 4, 2, 2}))), ShapeError);
  EXPECT_THROW(fuse_branches(C(low), C(Tensor::zeros({15, 3, 2, 2}))), ShapeError);
}

TEST(Crop, FullBoxConstantAndOrder) {
  Rng rng(11);
  const Tensor low = oracle::random_tensor({8, 2, 4, 4}, rng), high = oracle::random_tensor({16, 2, 4, 4}, rng);
  CropResult r = crop_actor_features(C(low), C(high), {Box{0, 0, 1, 1}, Box{0.2, 0.1, 0.6, 0.9}}, {5, 9}, {}, 4);
  ASSERT_EQ(r.actors.size(), 2u);
  EXPECT_EQ(r.actors[0].actor_id, 5);
  EXPECT_EQ(r.actors[1].actor_id, 9);
  EXPECT_LT(max_abs_diff(r.actors[0].roi_low.value(), low), 1e-15);
  EXPECT_LT(max_abs_diff(r.actors[0].roi_high.value(), high), 1e-15);

  const CropResult cst = crop_actor_features(C(Tensor::full({8, 2, 4, 4}, 1.5)), C(Tensor::full({16, 2, 4, 4}, -2.0)),
                                             {Box{0.3, 0.3, 0.5, 0.8}}, {0}, {}, 3);
  for (double v : cst.actors[0].roi_low.value().storage()) EXPECT_NEAR(v, 1.5, 1e-15);
  for (double v : cst.actors[0].roi_high.value().storage()) EXPECT_NEAR(v, -2.0, 1e-15);
}

TEST(Crop, HiddenSkippedAndBadBoxReported) {
  const Tensor low = Tensor::zeros({8, 1, 4, 4}), high = Tensor::zeros({16, 1, 4, 4});
  const CropResult r = crop_actor_features(C(low), C(high),
                                           {Box{0, 0, 0.5, 0.5}, Box{0.6, 0.1, 0.4, 0.9}, Box{0.5, 0.5, 1, 1}},
                                           {0, 1, 2}, {false, false, true}, 2);
  ASSERT_EQ(r.actors.size(), 1u);
  EXPECT_EQ(r.actors[0].actor_id, 0);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].actor_id, 1);
}

// ---- enhancement ---------------------------------------------------------------------

TEST(ClSam, ClosedForms) {
  const Tensor out = cl_sam(C(Tensor({3}, std::vector<double>{0.0, 100.0, 1.0}))).value();
  EXPECT_EQ(out[0], 0.0);
  EXPECT_NEAR(out[1], 100.0, 1e-12);
  EXPECT_NEAR(out[2], 0.731059, 1e-6);
}

TEST(ClSam, SignMagnitudeAndMonotone) {
  Tensor x({401});
  for (std::size_t i = 0; i < x.numel(); ++i) x[i] = -20.0 + 0.1 * static_cast<double>(i);
  const Tensor y = cl_sam(C(x)).value();
  for (std::size_t i = 0; i < x.numel(); ++i) {
    EXPECT_LE(std::abs(y[i]), std::abs(x[i]));
    EXPECT_TRUE(x[i] == 0.0 || std::signbit(y[i]) == std::signbit(x[i]) || y[i] == 0.0);
    if (i > 0 && x[i - 1] >= 0.0) {
      EXPECT_GT(y[i], y[i - 1]);
    }
  }
}

ModelConfig tiny_mfem_config(std::size_t channels, std::size_t hidden) {
  ModelConfig cfg = desk_preset();
  cfg.branch.stem_channels = channels;
  cfg.branch.block_channels = {channels, channels, channels, channels, channels};
  cfg.lstm_hidden = hidden;
  return cfg;
}

TEST(Mfem, ZeroLstmGivesZeros) {
  const ModelConfig cfg = tiny_mfem_config(3, 2);
  ParamSet ps = init_params(cfg, 1);
  for (auto& [path, t] : ps)
    if (path.starts_with("mfem.")) t.fill(0.0);
  Rng rng(12);
  const Tensor out = mfem(C(oracle::random_tensor({16, 3, 2, 2}, rng)), ParamBinding(ps, false), cfg).value();
  EXPECT_EQ(out, Tensor::zeros({2}));
}

TEST(Mfem, HandUnrolledToyCell) {
  const ModelConfig cfg = tiny_mfem_config(1, 1);
  ParamSet ps = init_params(cfg, 1);
  for (auto& [path, t] : ps)
    if (path.starts_with("mfem.")) t.fill(0.0);
  ps.get("mfem.lstm.input.wx").fill(5.0);
  ps.get("mfem.lstm.candidate.wx").fill(5.0);
  Tensor roi = Tensor::zeros({16, 1, 1, 1});
  roi[15] = 1.0;
  const double h = mfem(C(roi), ParamBinding(ps, false), cfg).value()[0];
  // Steps 1-15 see x = 0: g = tanh(0) = 0 keeps c = 0, h = 0. Step 16:
  // c = sigmoid(5) tanh(5), h = sigmoid(0) tanh(c).
  const double c16 = oracle::sigmoid(5.0) * std::tanh(5.0);
  EXPECT_NEAR(h, 0.5 * std::tanh(c16), 1e-9);
}

TEST(Mfem, OrderSensitiveUnlessConstant) {
  const ModelConfig cfg = tiny_mfem_config(4, 4);
  const ParamSet ps = init_params(cfg, 13);
  ParamBinding bind(ps, false);
  Rng rng(14);
  const Tensor roi = oracle::random_tensor({16, 4, 2, 2}, rng, -2, 2);
  Tensor reversed(roi.shape());
  const std::size_t n = roi.numel() / 16;
  for (std::size_t t = 0; t < 16; ++t)
    for (std::size_t k = 0; k < n; ++k) reversed[t * n + k] = roi[(15 - t) * n + k];
  EXPECT_GE(l2(mfem(C(roi), bind, cfg).value(), mfem(C(reversed), bind, cfg).value()), 1e-3);

  const Tensor frame = oracle::random_tensor({1, 4, 2, 2}, rng);
  Tensor constant({16, 4, 2, 2});
  for (std::size_t i = 0; i < constant.numel(); ++i) constant[i] = frame[i % n];
  EXPECT_EQ(mfem(C(constant), bind, cfg).value(), mfem(C(constant), bind, cfg).value());

  ModelConfig ablated = cfg;
  ablated.toggles.mfem = false;
  const ParamSet aps = init_params(ablated, 13);
  ParamBinding abind(aps, false);
  EXPECT_LT(l2(mfem(C(roi), abind, ablated).value(), mfem(C(reversed), abind, ablated).value()), 1e-12);
}

TEST(Classify, ZeroHeadAndBiasOnly) {
  const ModelConfig cfg = desk_preset();
  ParamSet ps = init_params(cfg, 1);
  ps.get("head.w").fill(0.0);
  ps.get("head.b").fill(0.0);
  Rng rng(15);
  const Var low = C(oracle::random_tensor({8, 32, 4, 4}, rng)), tv = C(oracle::random_tensor({32}, rng));
  EXPECT_EQ(classify(low, tv, ParamBinding(ps, false)).value(), Tensor::full({13}, 0.5));
  ps.get("head.b") = oracle::random_tensor({13}, rng);
  const Tensor s = classify(C(Tensor::zeros({8, 32, 4, 4})), C(Tensor::zeros({32})), ParamBinding(ps, false)).value();
  for (std::size_t k = 0; k < 13; ++k) EXPECT_NEAR(s[k], oracle::sigmoid(ps.get("head.b")[k]), 1e-15);
}

TEST(Classify, PooledAffineOracle) {
  const ModelConfig cfg = desk_preset();
  const ParamSet ps = init_params(cfg, 16);
  Rng rng(17);
  const Tensor low = oracle::random_tensor({8, 32, 4, 4}, rng), tv = oracle::random_tensor({32}, rng);
  Tensor feat({64});
  for (std::size_t c = 0; c < 32; ++c) {
    double s = 0.0;
    for (std::size_t t = 0; t < 8; ++t)
      for (std::size_t i = 0; i < 16; ++i) s += low.at({t, c, i / 4, i % 4});
    feat[c] = s / 128.0;
    feat[32 + c] = tv[c];
  }
  Tensor want = oracle::linear(feat, ps.get("head.w"), ps.get("head.b"));
  for (auto& v : want.storage()) v = oracle::sigmoid(v);
  EXPECT_LT(max_abs_diff(classify(C(low), C(tv), ParamBinding(ps, false)).value(), want), 1e-12);
  EXPECT_THROW(classify(C(low), C(Tensor::zeros({31})), ParamBinding(ps, false)), ShapeError);
}

// ---- full forward ------------------------------------------------------------------------

TEST(Forward, EightActorsEightRecords) {
  const Model model(desk_preset(), 21);
  const DualRateSample s = random_sample(8, 22);
  const auto records = model.forward(s);
  ASSERT_EQ(records.size(), 8u);
  for (std::size_t a = 0; a < 8; ++a) {
    EXPECT_EQ(records[a].actor_id, static_cast<int>(a));
    ASSERT_EQ(records[a].scores.size(), 13u);
    for (double v : records[a].scores) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
  EXPECT_EQ(model.forward(s), records);
}

TEST(Forward, HiddenActorsProduceNoRecord) {
  const Model model(desk_preset(), 23);
  DualRateSample s = random_sample(3, 24);
  s.hidden[1] = true;
  const auto records = model.forward(s);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].actor_id, 2);
}

TEST(Forward, InvalidBoxIsLocated) {
  const Model model(desk_preset(), 25);
  DualRateSample s = random_sample(2, 26);
  s.boxes[1] = Box{0.7, 0.2, 0.3, 0.4};
  try {
    model.forward(s);
    FAIL() << "expected BoxError";
  } catch (const BoxError& e) {
    EXPECT_NE(std::string(e.what()).find("v@3"), std::string::npos) << e.what();
  }
}

TEST(Forward, TogglesOffRemoveModuleParameters) {
  ModelConfig off = desk_preset();
  off.toggles = {false, false, false, false};
  const Model a(desk_preset(), 27), b(off, 27);
  const DualRateSample s = random_sample(2, 28);
  EXPECT_NE(a.forward(s)[0].scores, b.forward(s)[0].scores);
  for (const auto& path : b.params().paths()) {
    EXPECT_EQ(path.find("fl_sam"), std::string::npos) << path;
    EXPECT_EQ(path.find("kmfem"), std::string::npos) << path;
    EXPECT_EQ(path.find("lstm"), std::string::npos) << path;
  }
  EXPECT_TRUE(a.params().contains("mfem.lstm.forget.wh"));
  EXPECT_TRUE(a.params().contains("low.fl_sam4.w"));
  EXPECT_TRUE(a.params().contains("high.kmfem1.motion.w"));
}

TEST(Forward, ParamSetMustMatchConfig) {
  ParamSet ps = init_params(desk_preset(), 1);
  EXPECT_NO_THROW(Model(desk_preset(), ps));
  ps.add("extra.w", Tensor::zeros({1}));
  EXPECT_THROW(Model(desk_preset(), ps), ConsistencyError);
}

TEST(Forward, PixelGradientEndToEnd) {
  const Model model(desk_preset(), 29);
  const DualRateSample s = random_sample(1, 30);
  auto fn = [&](const std::vector<Var>& in) {
    ParamBinding bind(model.params(), false);
    return model.forward_graph(bind, s, in[0], in[1]).actors[0].scores;
  };
  GradCheckOptions opt;
  opt.max_entries_per_input = 12;
  opt.seed = 3;
  const GradCheckResult r = grad_check(fn, {s.low, s.high}, opt);
  EXPECT_TRUE(r.passed(1e-3)) << r.max_rel_error;
}

TEST(Records, CsvRoundTrip) {
  std::vector<PredictionRecord> recs{{"v", 1, 2, std::vector<double>(13, 0.25), std::vector<int>(13, 0)},
                                     {"w", 4, 0, std::vector<double>(13, 0.5), {}}};
  recs[0].targets[3] = 1;
  const std::string text = serialize_records(recs);
  EXPECT_EQ(parse_records(text), recs);
  EXPECT_EQ(serialize_records(parse_records(text)), text);
}

TEST(Records, GateGridRoundTrip) {
  const auto dir = test::scratch_dir("gate_grid");
  Rng rng(31);
  Tensor g = oracle::random_tensor({8, 1, 4, 4}, rng, 0, 1);
  round_to_float(g);
  write_gate_grid(dir / "g.bin", g);
  EXPECT_EQ(read_gate_grid(dir / "g.bin"), g);
}

}  // namespace
}  // namespace stpen
