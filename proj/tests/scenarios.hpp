#pragma once

// Synthetic benchmark set-ups shared by unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <vector>

#include "holo/core/image.hpp"
#include "holo/core/optical_config.hpp"
#include "holo/metrics.hpp"
#include "holo/mhpr.hpp"
#include "holo/propagate.hpp"
#include "holo/simulate.hpp"
#include "holo/superres.hpp"

namespace scenario {

using namespace holo;

inline double bilinear(const RealImage& a, double y, double x) {
  const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0, fx = x - x0;
  auto at = [&](int r, int c) {
    r = std::clamp(r, 0, a.height() - 1);
    c = std::clamp(c, 0, a.width() - 1);
    return a(r, c);
  };
  return at(y0, x0) * (1 - fy) * (1 - fx) + at(y0 + 1, x0) * fy * (1 - fx) +
         at(y0, x0 + 1) * (1 - fy) * fx + at(y0 + 1, x0 + 1) * fy * fx;
}

inline double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

/// Contrast at the midpoint relative to the weaker point: deviation from the
/// background median at the midpoint divided by the smaller deviation at the
/// two points. Below 0.8 means a dip of at least 20%.
inline double midpoint_ratio(const RealImage& amp, double y1, double x1, double y2, double x2) {
  const double bg = median({amp.data().begin(), amp.data().end()});
  const double d1 = std::abs(bilinear(amp, y1, x1) - bg);
  const double d2 = std::abs(bilinear(amp, y2, x2) - bg);
  const double dm = std::abs(bilinear(amp, (y1 + y2) / 2, (x1 + x2) / 2) - bg);
  return dm / std::min(d1, d2);
}

inline RealImage refocus_amplitude(const RealImage& intensity, double z, const OpticalConfig& cfg) {
  RealImage amp(intensity.height(), intensity.width());
  for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = std::sqrt(std::max(intensity[i], 0.0));
  return propagate(ComplexField::from_real(amp, cfg.sr_pitch_um), -z, cfg).amplitude();
}

struct TwoPointOutcome {
  double sr_ratio = 0;          // super-resolved hologram (estimated shifts), refocused
  double sr_ratio_true = 0;     // same with the simulator's shifts
  double best_lowres_ratio = 0; // smallest ratio over all single low-res frames
  double max_shift_error = 0;   // low-res pixels
};

/// Two opaque points 8 fine pixels apart imaged through the 6 x 6 sensor grid.
inline TwoPointOutcome two_point_experiment(int size = 504, double z = 150.0, double separation_px = 8) {
  const OpticalConfig cfg;
  const int L = cfg.sr_factor();
  SampleSpec spec;
  spec.kind = SampleKind::TwoPoint;
  spec.separation_px = separation_px;
  Rng rng(21);
  const auto sample = synth_sample(spec, size, cfg, rng);
  const auto frames = capture_sr_grid(sample, z, cfg, L, NoiseSpec{}, rng);
  std::vector<RealImage> images;
  for (const auto& f : frames) images.push_back(f.image);
  const ShiftSet shifts = estimate_shifts(images);

  TwoPointOutcome out;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    out.max_shift_error = std::max({out.max_shift_error,
                                    std::abs(shifts[k].dx - frames[k].dx_um / cfg.sensor_pitch_um),
                                    std::abs(shifts[k].dy - frames[k].dy_um / cfg.sensor_pitch_um)});
  }
  const auto [p1, p2] = two_point_centers(spec, size);
  const double anchor = (L - 1) / 2.0;  // a fine cell holds the mean over [k, k + L)

  const RealImage sr = shift_and_add(images, shifts, L);
  out.sr_ratio = midpoint_ratio(refocus_amplitude(sr, z, cfg), p1.first - anchor,
                                p1.second - anchor, p2.first - anchor, p2.second - anchor);

  ShiftSet truth;
  for (const auto& f : frames) truth.push_back({f.dx_um / cfg.sensor_pitch_um, f.dy_um / cfg.sensor_pitch_um});
  out.sr_ratio_true = midpoint_ratio(refocus_amplitude(shift_and_add(images, truth, L), z, cfg),
                                     p1.first - anchor, p1.second - anchor, p2.first - anchor,
                                     p2.second - anchor);

  const OpticalConfig low = cfg.at_sensor_pitch();
  out.best_lowres_ratio = 1e9;
  for (const auto& f : frames) {
    const double oy = f.dy_um / cfg.sr_pitch_um, ox = f.dx_um / cfg.sr_pitch_um;
    const RealImage a = refocus_amplitude(f.image, z, low);
    const double r = midpoint_ratio(a, (p1.first + oy - anchor) / L, (p1.second + ox - anchor) / L,
                                    (p2.first + oy - anchor) / L, (p2.second + ox - anchor) / L);
    out.best_lowres_ratio = std::min(out.best_lowres_ratio, r);
  }
  return out;
}

/// Smooth phase object whose holograms register reliably across the 6 x 6 grid.
inline SampleObject registration_sample(int size, std::uint64_t seed) {
  SampleSpec spec;
  spec.kind = SampleKind::SmoothRandom;
  spec.correlation_px = 8;
  spec.phase_std = 0.8;
  Rng rng(seed);
  return synth_sample(spec, size, OpticalConfig{}, rng);
}

/// Phase-disk sample for the multi-height benchmark (256 x 256).
inline SampleObject mhpr_sample(std::uint64_t seed, int size = 256) {
  SampleSpec spec;
  spec.kind = SampleKind::PhaseDisks;
  spec.num_disks = 10;
  spec.disk_radius_min_px = 5;
  spec.disk_radius_max_px = 14;
  spec.disk_phase_min = 0.3;
  spec.disk_phase_max = 1.0;
  Rng rng(seed);
  return synth_sample(spec, size, OpticalConfig{}, rng);
}

/// Phase-disk sample for the focus benchmark.
inline SampleObject focus_sample(std::uint64_t seed, int size) {
  SampleSpec spec;
  spec.kind = SampleKind::PhaseDisks;
  spec.num_disks = 10;
  spec.disk_radius_min_px = 10;
  spec.disk_radius_max_px = 40;
  spec.disk_phase_min = 0.5;
  spec.disk_phase_max = 2.5;
  Rng rng(seed);
  return synth_sample(spec, size, OpticalConfig{}, rng);
}

/// Pixels at least `margin` px outside every disk of a phase-disk sample.
inline std::vector<std::size_t> background_pixels(const SampleObject& s, double margin) {
  const int n = s.transmittance.height();
  std::vector<std::size_t> idx;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      bool clear = true;
      for (const Disk& d : s.spec.disks)
        clear = clear && std::hypot(r - d.cy, c - d.cx) >= d.radius + margin;
      if (clear) idx.push_back(static_cast<std::size_t>(r) * n + c);
    }
  return idx;
}

inline double std_over(const RealImage& a, const std::vector<std::size_t>& idx) {
  double m = 0, v = 0;
  for (std::size_t i : idx) m += a[i];
  m /= static_cast<double>(idx.size());
  for (std::size_t i : idx) v += (a[i] - m) * (a[i] - m);
  return std::sqrt(v / static_cast<double>(idx.size()));
}

struct MhprOutcome {
  double amp_rmse = 0;
  double phase_rmse = 0;       // after global-phase alignment, support amplitude > 0.1
  double zero_phase_amp_rmse = 0;
  double background_std = 0;   // MH-PR amplitude, flat region
  double zero_phase_background_std = 0;
  ReconResult recon;
};

/// Noise-free phase-disk sample at z2 = 400 um, heights 400 + 15 k (k < m),
/// the sensor-side stack fed in `order` (indices into the ascending heights).
inline MhprOutcome mhpr_benchmark(std::uint64_t seed, int m, std::vector<int> order = {},
                                  int size = 256) {
  const OpticalConfig cfg;
  const double z2 = 400.0;
  const SampleObject s = mhpr_sample(seed, size);
  if (order.empty())
    for (int k = 0; k < m; ++k) order.push_back(k);
  CaptureGeometry geom;
  for (int k : order) geom.z2_list_um.push_back(z2 + 15.0 * k);
  Rng rng(seed);
  const HologramStack stack = capture_multiheight(s, geom, cfg, NoiseSpec{}, rng);
  MhprOptions opts;
  bool ascending = true;
  for (std::size_t k = 1; k < order.size(); ++k) ascending = ascending && order[k] > order[k - 1];
  if (!ascending) opts.traversal = Traversal::AsGiven;

  MhprOutcome out;
  // The sample distance is measured from the first hologram fed in.
  const double first = geom.z2_list_um[0];
  out.recon = mhpr(stack, geom.z2_list_um, first, opts, cfg);
  const ComplexField& u = out.recon.field;
  const ComplexField& t = s.transmittance;
  out.amp_rmse = rmse(u.amplitude(), t.amplitude());
  out.phase_rmse = phase_rmse(u, t, 0.1);
  const auto bg = background_pixels(s, 6.0);
  out.background_std = std_over(u.amplitude(), bg);
  const RealImage& i0 = stack.holograms[0].intensity;
  const ComplexField zp = backpropagate_zero_phase(i0, first, cfg);
  out.zero_phase_amp_rmse = rmse(zp.amplitude(), t.amplitude());
  out.zero_phase_background_std = std_over(zp.amplitude(), bg);
  return out;
}

}  // namespace scenario
