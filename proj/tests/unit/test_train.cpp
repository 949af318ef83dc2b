#include <gtest/gtest.h>

#include "holo/core/error.hpp"
#include "holo/mhpr.hpp"
#include "holo/nn/train.hpp"

using namespace holo;
using namespace holo::nn;

namespace {

OpticalConfig toy_optics() {
  OpticalConfig cfg;
  cfg.sr_pitch_um = 1.12;
  cfg.sensor_pitch_um = 2.24;
  return cfg;
}

ToyDataSpec toy_spec(int count) {
  ToyDataSpec spec;
  spec.count = count;
  spec.size = 32;
  spec.heights = 4;
  spec.sample.kind = SampleKind::SmoothRandom;
  spec.sample.correlation_px = 4;
  spec.sample.phase_std = 0.8;
  return spec;
}

std::vector<TrainSample> toy_data(int count, std::uint64_t seed) {
  const auto spec = toy_spec(count);
  std::vector<TrainSample> out;
  for (const auto& s : make_toy_samples(spec, toy_optics(), seed))
    out.push_back(to_train_sample(s, spec, toy_optics()));
  return out;
}

struct TrainSetup {
  GeneratorConfig gen;
  DiscriminatorConfig disc;
  TrainOptions opts;
};

TrainSetup small_setup(int epochs, double gamma = 0.0) {
  TrainSetup s;
  s.gen.base = 4;
  s.gen.scales = 3;
  s.gen.m_train = 2;
  s.disc.base = 2;
  s.disc.blocks = 3;
  s.disc.hidden = 8;
  s.disc.height = s.disc.width = 32;
  s.opts.epochs = epochs;
  s.opts.weights = {3, 1, gamma};
  s.opts.msssim.scales = 2;
  s.opts.msssim.dynamic_range = 2.0;
  s.opts.gen_adam.lr = 1e-3;
  s.opts.disc_adam.lr = 1e-4;
  s.opts.seed = 21;
  return s;
}

}  // namespace

TEST(ToyData, ShapesAndDeterminism) {
  const auto spec = toy_spec(3);
  const auto a = make_toy_samples(spec, toy_optics(), 4), b = make_toy_samples(spec, toy_optics(), 4);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].stack.holograms.size(), 4u);
    for (const auto& h : a[i].stack.holograms) {
      EXPECT_GE(h.z2_um, spec.z_min_um);
      EXPECT_LE(h.z2_um, spec.z_max_um);
    }
    EXPECT_EQ(a[i].stack.holograms[2].intensity.values()[7], b[i].stack.holograms[2].intensity.values()[7]);
  }
  const TrainSample t = to_train_sample(a[0], spec, toy_optics());
  EXPECT_EQ(t.inputs.size(), 4u);
  EXPECT_EQ(t.target.c(), 2);
  EXPECT_EQ(t.target.h(), 32);
  // Back-propagated inputs are the zero-phase fields at z_bar.
  const ComplexField zp = backpropagate_zero_phase(a[0].stack.holograms[1].intensity, spec.z_bar_um, toy_optics());
  EXPECT_EQ(t.inputs[1], field_to_tensor(zp));

  ToyDataSpec raw = spec;
  raw.raw_inputs = true;
  EXPECT_EQ(to_train_sample(a[0], raw, toy_optics()).inputs[0], rh_md_encode(a[0].stack.holograms[0].intensity));
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  const auto data = toy_data(2, 1);
  const TrainSetup s = small_setup(0);
  const TrainResult r = train_toy(data, s.gen, s.disc, s.opts);
  EXPECT_TRUE(r.history.empty());
  Rng init = Rng(s.opts.seed).split(1);
  EXPECT_TRUE(r.generator.same_values(init_params(generator_layers(s.gen), init)));
  EXPECT_DOUBLE_EQ(r.initial_mae, dataset_mae(s.gen, r.generator, data));
}

TEST(Train, BitwiseDeterministic) {
  const auto data = toy_data(3, 2);
  const TrainSetup s = small_setup(2, 0.5);
  const TrainResult a = train_toy(data, s.gen, s.disc, s.opts);
  const TrainResult b = train_toy(data, s.gen, s.disc, s.opts);
  EXPECT_TRUE(a.generator.same_values(b.generator));
  EXPECT_TRUE(a.discriminator.same_values(b.discriminator));
  EXPECT_EQ(loss_history_csv(a.history), loss_history_csv(b.history));

  TrainSetup other = s;
  other.opts.seed = 22;
  EXPECT_FALSE(train_toy(data, other.gen, other.disc, other.opts).generator.same_values(a.generator));
}

TEST(Train, ReducesMaeWithoutAdversary) {
  const auto data = toy_data(8, 3);
  const TrainSetup s = small_setup(6);
  const TrainResult r = train_toy(data, s.gen, s.disc, s.opts);
  ASSERT_EQ(r.history.size(), 6u);
  const double final_mae = dataset_mae(s.gen, r.generator, data);
  EXPECT_LT(final_mae, 0.7 * r.initial_mae);
  EXPECT_LT(r.history.back().mae, r.history.front().mae);
  for (const auto& e : r.history) {
    EXPECT_EQ(e.adversarial, 0.0);
    EXPECT_EQ(e.loss_d, 0.0);
  }
  // With gamma = 0 the discriminator is never updated.
  Rng init = Rng(s.opts.seed).split(2);
  EXPECT_TRUE(r.discriminator.same_values(init_params(discriminator_layers(s.disc), init)));
}

TEST(Train, AdversarialRunUpdatesBoth) {
  const auto data = toy_data(2, 4);
  const TrainSetup s = small_setup(1, 0.5);
  const TrainResult r = train_toy(data, s.gen, s.disc, s.opts);
  Rng init = Rng(s.opts.seed).split(2);
  EXPECT_FALSE(r.discriminator.same_values(init_params(discriminator_layers(s.disc), init)));
  EXPECT_GT(r.history[0].loss_d, 0.0);
  EXPECT_GT(r.history[0].adversarial, 0.0);
}

TEST(Train, HistoryCsv) {
  EpochLosses e{1, 2.5, 0.25, 0.125, 0, 0.5};
  EXPECT_EQ(loss_history_csv({e}),
            "epoch,loss_g,mae,msssim_loss,adversarial,loss_d\n1,2.5,0.25,0.125,0,0.5\n");
}

TEST(Train, RejectsBadInput) {
  const TrainSetup s = small_setup(1);
  EXPECT_THROW(train_toy({}, s.gen, s.disc, s.opts), InvalidArgument);
  auto data = toy_data(2, 5);
  data[1].target = Tensor4(1, 2, 16, 16);
  EXPECT_THROW(train_toy(data, s.gen, s.disc, s.opts), InvalidArgument);
  TrainSetup neg = s;
  neg.opts.epochs = -1;
  EXPECT_THROW(train_toy(toy_data(1, 6), neg.gen, neg.disc, neg.opts), InvalidArgument);
}

TEST(Train, DivergenceNamesTheEpoch) {
  const auto data = toy_data(2, 7);
  TrainSetup s = small_setup(3);
  s.opts.gen_adam.lr = 1e200;
  try {
    train_toy(data, s.gen, s.disc, s.opts);
    FAIL() << "expected divergence";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Inference, RhmAndRhmdPaths) {
  const auto spec = toy_spec(1);
  const auto samples = make_toy_samples(spec, toy_optics(), 8);
  GeneratorConfig g;
  g.base = 2;
  g.scales = 3;
  g.m_train = 3;
  Rng rng(9);
  const ParamStore p = init_params(generator_layers(g), rng);
  std::vector<RealImage> hs;
  for (const auto& h : samples[0].stack.holograms) hs.push_back(h.intensity);
  hs.resize(2);
  const ComplexField u = infer_rh_m(g, p, hs, 450, toy_optics());
  EXPECT_EQ(u.height(), 32);
  EXPECT_DOUBLE_EQ(u.pitch_um(), 1.12);
  EXPECT_TRUE(u.all_finite());
  EXPECT_THROW(infer_rh_md(g, p, hs, toy_optics()), InvalidArgument);  // needs dilation 2
  GeneratorConfig gd = g;
  gd.dilation = 2;
  const ParamStore pd = init_params(generator_layers(gd), rng);
  EXPECT_TRUE(infer_rh_md(gd, pd, hs, toy_optics()).all_finite());
  hs.resize(4);
  hs[2] = hs[3] = hs[0];
  EXPECT_THROW(infer_rh_m(g, p, hs, 450, toy_optics()), InvalidArgument);  // longer than m_train
}
