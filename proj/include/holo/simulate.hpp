#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "holo/core/image.hpp"
#include "holo/core/optical_config.hpp"
#include "holo/core/rng.hpp"

namespace holo {

enum class SampleKind { Uniform, PhaseDisks, AmplitudeBars, SmoothRandom, TwoPoint };

SampleKind parse_sample_kind(std::string_view name);
std::string to_string(SampleKind kind);

/// Disk in pixel coordinates (row/column of the center) with a phase in radians.
struct Disk {
  double cy = 0;
  double cx = 0;
  double radius = 0;
  double phase = 0;
};

/// Recipe for a synthetic 2D sample. Only the fields of the selected kind are used.
struct SampleSpec {
  SampleKind kind = SampleKind::Uniform;

  // phase_disks: explicit disks, or `num_disks` random ones when the list is empty.
  std::vector<Disk> disks;
  int num_disks = 6;
  double disk_radius_min_px = 5.0;
  double disk_radius_max_px = 14.0;
  double disk_phase_min = 0.3;
  double disk_phase_max = 1.0;

  // amplitude_bars: a group of vertical absorbing bars around the center.
  int bar_count = 5;
  double bar_width_px = 4.0;
  double bar_amplitude = 0.3;

  // smooth_random: Gaussian-correlated phase with an exact standard deviation,
  // optionally with a correlated absorption of the given depth.
  double phase_std = 0.8;
  double correlation_px = 4.0;
  double amplitude_depth = 0.0;

  // two_point: two square points on a unit background, separated horizontally.
  double separation_px = 8.0;
  int point_px = 1;
  double point_amplitude = 0.0;
};

struct SampleObject {
  ComplexField transmittance;
  SampleSpec spec;
};

/// Deterministic given (spec, size, rng state). Amplitude lies in [0, 1] and
/// phase in (-pi, pi].
SampleObject synth_sample(const SampleSpec& spec, int size, const OpticalConfig& cfg, Rng& rng);

/// Pixel coordinates (row, col) of the two points of a two_point sample.
std::pair<std::pair<double, double>, std::pair<double, double>> two_point_centers(
    const SampleSpec& spec, int size);

struct NoiseSpec {
  double gaussian_sigma = 0.0;  // fraction of the mean intensity
  int quantization_bits = 0;    // 0 (off), 8 or 16

  void validate() const;
};

struct CaptureGeometry {
  std::vector<double> z2_list_um;
  /// Optional per-exposure lateral shifts (dx, dy) in um; empty means none.
  std::vector<std::pair<double, double>> lateral_shifts_um;
  double z1_um = 70000.0;  // informational only

  void validate() const;

  static CaptureGeometry linear(double z2_start_um, double step_um, int count);
};

struct Hologram {
  RealImage intensity;
  double z2_um = 0.0;
  double dx_um = 0.0;
  double dy_um = 0.0;
};

struct HologramStack {
  std::vector<Hologram> holograms;
  /// False when the true z2 values must not be used by reconstructors.
  bool heights_known = true;

  std::size_t size() const noexcept { return holograms.size(); }
  std::vector<double> z2_values() const;
};

/// Plane-wave in-line hologram |propagate(t, z2)|^2 with optional Gaussian noise
/// (std = sigma * mean intensity), clamping to >= 0 and uniform quantization.
Hologram capture(const SampleObject& sample, double z2_um, const OpticalConfig& cfg,
                 const NoiseSpec& noise, Rng& rng);

HologramStack capture_multiheight(const SampleObject& sample, const CaptureGeometry& geometry,
                                  const OpticalConfig& cfg, const NoiseSpec& noise, Rng& rng);

struct SrFrame {
  RealImage image;  // low-resolution frame at the sensor pitch
  double dx_um = 0.0;
  double dy_um = 0.0;
};

/// L x L grid of sub-pixel shifted, sensor-binned frames. Frame (iy, ix) is
/// shifted by (iy, ix) * sr_pitch plus an optional uniform jitter of up to
/// +-jitter_um per axis; frame 0 is never jittered. Frames are ordered row-major.
std::vector<SrFrame> capture_sr_grid(const SampleObject& sample, double z2_um,
                                     const OpticalConfig& cfg, int factor,
                                     const NoiseSpec& noise, Rng& rng, double jitter_um = 0.0);

/// Area average over non-overlapping factor x factor blocks.
RealImage bin_box(const RealImage& image, int factor);

/// Periodic translation of the content by (dy, dx) pixels via a Fourier phase
/// ramp: out(x) = in(x - d).
RealImage fourier_shift(const RealImage& image, double dy_px, double dx_px);

/// One HTF file per frame (holo_XX.htf, f32) plus manifest.tsv with lines
/// "index z2_um dx_um dy_um sigma seed", tab separated.
void write_stack(const std::filesystem::path& dir, const HologramStack& stack,
                 const NoiseSpec& noise, std::uint64_t seed);
HologramStack read_stack(const std::filesystem::path& dir);

}  // namespace holo
