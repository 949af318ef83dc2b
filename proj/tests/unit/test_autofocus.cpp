#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "holo/autofocus.hpp"
#include "holo/core/error.hpp"
#include "holo/simulate.hpp"
#include "scenarios.hpp"

using namespace holo;

namespace {

RealImage from_values(int h, int w, std::vector<double> v) {
  RealImage img(h, w);
  for (std::size_t i = 0; i < v.size(); ++i) img[i] = v[i];
  return img;
}

RealImage focus_hologram(std::uint64_t seed, int size, double z) {
  const auto s = scenario::focus_sample(seed, size);
  Rng rng(seed + 100);
  return capture(s, z, OpticalConfig{}, NoiseSpec{}, rng).intensity;
}

}  // namespace

TEST(Tamura, HandComputedValues) {
  // mean 2, population std 1
  EXPECT_NEAR(tamura(from_values(1, 2, {1, 3})), std::sqrt(0.5), 1e-15);
  // mean 1, std sqrt(3)
  EXPECT_NEAR(tamura(from_values(2, 2, {0, 0, 0, 4})), std::pow(3.0, 0.25), 1e-15);
}

TEST(Tamura, DegenerateInputs) {
  EXPECT_EQ(tamura(RealImage(4, 4, 2.5)), 0.0);
  EXPECT_EQ(tamura(RealImage(4, 4, 0.0)), 0.0);
  EXPECT_THROW(tamura(from_values(1, 2, {1, -1})), InvalidArgument);
}

TEST(Tamura, ScaleInvariant) {
  Rng rng(3);
  RealImage a(16, 16);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform();
  RealImage b = a;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] *= 37.5;
  EXPECT_NEAR(tamura(a), tamura(b), 1e-12);
}

TEST(GradientMagnitude, LinearRampIsExactEverywhere) {
  RealImage a(5, 6);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 6; ++c) a(r, c) = 3.0 * c - 4.0 * r;
  const RealImage g = gradient_magnitude(a);
  for (double v : g.data()) EXPECT_NEAR(v, 5.0, 1e-12);
}

TEST(FocusScore, PeaksAtTrueDistance) {
  const OpticalConfig cfg;
  for (std::uint64_t seed : {1u, 2u}) {
    const RealImage h = focus_hologram(seed, 512, 450.0);
    const double at = focus_score(h, 450.0, cfg);
    EXPECT_GT(at, focus_score(h, 400.0, cfg));
    EXPECT_GT(at, focus_score(h, 500.0, cfg));
  }
}

TEST(FocusScore, ContinuousInDistance) {
  const OpticalConfig cfg;
  const RealImage h = focus_hologram(4, 256, 420.0);
  const double a = focus_score(h, 420.0, cfg), b = focus_score(h, 420.001, cfg);
  EXPECT_NEAR(a, b, 1e-4 * a);
}

TEST(Autofocus, RecoversDistance) {
  const OpticalConfig cfg;
  const RealImage h = focus_hologram(5, 512, 470.0);
  const FocusResult r = autofocus_scan(h, FocusSearch{}, cfg);
  EXPECT_NEAR(r.z_um, 470.0, 5.0);
  EXPECT_EQ(r.coarse_z.size(), 61u);
  EXPECT_EQ(r.coarse_z.front(), 300.0);
  EXPECT_EQ(r.coarse_z.back(), 600.0);
  EXPECT_GT(r.evaluations, 61);
  EXPECT_GE(r.score, *std::max_element(r.coarse_scores.begin(), r.coarse_scores.end()));
  EXPECT_EQ(autofocus(h, FocusSearch{}, cfg), r.z_um);
}

TEST(Autofocus, StaysInRangeNearBestCoarseSample) {
  const OpticalConfig cfg;
  const RealImage h = focus_hologram(6, 256, 450.0);
  const FocusSearch search{300, 420, 7, 0.1};
  const FocusResult r = autofocus_scan(h, search, cfg);
  EXPECT_EQ(r.coarse_z.back(), 420.0);  // partial last step still samples the bound
  const auto best = std::max_element(r.coarse_scores.begin(), r.coarse_scores.end());
  const double zc = r.coarse_z[best - r.coarse_scores.begin()];
  EXPECT_GE(r.z_um, 300.0);
  EXPECT_LE(r.z_um, 420.0);
  EXPECT_LE(std::abs(r.z_um - zc), 7.0);
}

TEST(Autofocus, TiesResolveToSmallerDistance) {
  // A uniform hologram scores 0 everywhere.
  const FocusResult r = autofocus_scan(RealImage(32, 32, 1.0), FocusSearch{}, OpticalConfig{});
  EXPECT_EQ(r.z_um, 300.0);
}

TEST(Autofocus, InvalidSearch) {
  const RealImage h(16, 16, 1.0);
  const OpticalConfig cfg;
  EXPECT_THROW(autofocus(h, FocusSearch{600, 300, 5, 0.1}, cfg), InvalidArgument);
  EXPECT_THROW(autofocus(h, FocusSearch{300, 600, 0, 0.1}, cfg), InvalidArgument);
  EXPECT_THROW(autofocus(h, FocusSearch{300, 600, 5, 0}, cfg), InvalidArgument);
  RealImage neg = h;
  neg[3] = -1;
  EXPECT_THROW(focus_score(neg, 400, cfg), InvalidArgument);
}

TEST(Autofocus, WithinTwoMicronsAtCenterAndNearEdge) {
  const OpticalConfig cfg;
  for (double z : {450.0, 310.0}) {
    const RealImage h = focus_hologram(11, 1024, z);
    EXPECT_NEAR(autofocus(h, FocusSearch{}, cfg), z, 2.0) << "z = " << z;
  }
}

// The in-focus peak is sharp: at 1024^2 the largest step is 42-46% of the
// score range, at 512^2 it reaches 50-55%.
TEST(Autofocus, CoarseScanHasNoAliasedJumps) {
  for (std::uint64_t seed : {12u, 13u, 14u}) {
    const RealImage h = focus_hologram(seed, 1024, 520.0);
    const FocusResult r = autofocus_scan(h, FocusSearch{}, OpticalConfig{});
    const auto [lo, hi] = std::minmax_element(r.coarse_scores.begin(), r.coarse_scores.end());
    for (std::size_t i = 1; i < r.coarse_scores.size(); ++i)
      EXPECT_LT(std::abs(r.coarse_scores[i] - r.coarse_scores[i - 1]), 0.5 * (*hi - *lo));
  }
}

TEST(Autofocus, TwoPercentNoiseStaysWithinFiveMicrons) {
  const OpticalConfig cfg;
  Rng zs(5150);
  std::vector<double> errors;
  for (int i = 0; i < 6; ++i) {
    const double z = 300.0 + 300.0 * zs.uniform();
    const auto s = scenario::focus_sample(300 + i, 1024);
    Rng rng(i);
    const RealImage h = capture(s, z, cfg, NoiseSpec{0.02, 0}, rng).intensity;
    errors.push_back(std::abs(autofocus(h, FocusSearch{}, cfg) - z));
  }
  for (double e : errors) EXPECT_LE(e, 5.0);
}
