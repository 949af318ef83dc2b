#include "holo/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "holo/core/error.hpp"
#include "holo/core/htf.hpp"
#include "holo/core/io.hpp"
#include "holo/fft.hpp"
#include "holo/propagate.hpp"

namespace holo {

namespace {

constexpr double kPi = std::numbers::pi;

RealImage smooth_noise(int size, double correlation_px, Rng& rng) {
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(size) * size);
  for (auto& v : buf) v = rng.normal();
  fft2(buf, size, size, FftDirection::Forward);
  const double s2 = 2.0 * kPi * kPi * correlation_px * correlation_px;
  for (int r = 0; r < size; ++r) {
    const double fy = (r < (size + 1) / 2 ? r : r - size) / static_cast<double>(size);
    for (int c = 0; c < size; ++c) {
      const double fx = (c < (size + 1) / 2 ? c : c - size) / static_cast<double>(size);
      buf[static_cast<std::size_t>(r) * size + c] *= std::exp(-s2 * (fx * fx + fy * fy));
    }
  }
  fft2(buf, size, size, FftDirection::Inverse);
  RealImage out(size, size);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
  return out;
}

void normalize_std(RealImage& img, double target_std) {
  const double mean = img.mean();
  double var = 0;
  for (double v : img.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(img.size());
  const double scale = var > 0 ? target_std / std::sqrt(var) : 0.0;
  for (double& v : img.data()) v = (v - mean) * scale;
}

void apply_noise(RealImage& img, const NoiseSpec& noise, Rng& rng) {
  if (noise.gaussian_sigma > 0) {
    const double sd = noise.gaussian_sigma * img.mean();
    for (double& v : img.data()) v += sd * rng.normal();
  }
  for (double& v : img.data()) v = std::max(v, 0.0);
  if (noise.quantization_bits > 0) {
    const double levels = std::ldexp(1.0, noise.quantization_bits) - 1.0;
    const double full_scale = img.max();
    if (full_scale > 0)
      for (double& v : img.data()) v = std::round(v / full_scale * levels) * full_scale / levels;
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SampleKind parse_sample_kind(std::string_view name) {
  if (name == "uniform") return SampleKind::Uniform;
  if (name == "phase_disks") return SampleKind::PhaseDisks;
  if (name == "amplitude_bars") return SampleKind::AmplitudeBars;
  if (name == "smooth_random") return SampleKind::SmoothRandom;
  if (name == "two_point") return SampleKind::TwoPoint;
  throw InvalidArgument("unknown sample spec: " + std::string(name));
}

std::string to_string(SampleKind kind) {
  switch (kind) {
    case SampleKind::Uniform: return "uniform";
    case SampleKind::PhaseDisks: return "phase_disks";
    case SampleKind::AmplitudeBars: return "amplitude_bars";
    case SampleKind::SmoothRandom: return "smooth_random";
    case SampleKind::TwoPoint: return "two_point";
  }
  return "unknown";
}

std::pair<std::pair<double, double>, std::pair<double, double>> two_point_centers(
    const SampleSpec& spec, int size) {
  const int sep = static_cast<int>(std::lround(spec.separation_px));
  const int row = size / 2;
  const int left = size / 2 - sep / 2;
  const double half = (spec.point_px - 1) / 2.0;
  return {{row + half, left + half}, {row + half, left + sep + half}};
}

SampleObject synth_sample(const SampleSpec& spec, int size, const OpticalConfig& cfg, Rng& rng) {
  if (size < 32) throw InvalidArgument("synth_sample: size must be >= 32");
  cfg.validate();
  RealImage amp(size, size, 1.0);
  RealImage phase(size, size, 0.0);
  SampleSpec used = spec;

  switch (spec.kind) {
    case SampleKind::Uniform: break;

    case SampleKind::PhaseDisks: {
      if (used.disks.empty()) {
        for (int k = 0; k < spec.num_disks; ++k) {
          Disk d;
          d.cy = rng.uniform(0.15 * size, 0.85 * size);
          d.cx = rng.uniform(0.15 * size, 0.85 * size);
          d.radius = rng.uniform(spec.disk_radius_min_px, spec.disk_radius_max_px);
          d.phase = rng.uniform(spec.disk_phase_min, spec.disk_phase_max);
          used.disks.push_back(d);
        }
      }
      for (const Disk& d : used.disks) {
        for (int r = 0; r < size; ++r)
          for (int c = 0; c < size; ++c)
            if (std::hypot(r - d.cy, c - d.cx) < d.radius) phase(r, c) = wrap_phase(d.phase);
      }
      break;
    }

    case SampleKind::AmplitudeBars: {
      if (!(spec.bar_amplitude >= 0 && spec.bar_amplitude <= 1))
        throw InvalidArgument("synth_sample: bar amplitude must lie in [0, 1]");
      const double period = 2.0 * spec.bar_width_px;
      const double x0 = size / 2.0 - spec.bar_count * period / 2.0;
      for (int r = size / 4; r < 3 * size / 4; ++r)
        for (int c = 0; c < size; ++c) {
          const double u = c - x0;
          if (u < 0 || u >= spec.bar_count * period) continue;
          if (std::fmod(u, period) < spec.bar_width_px) amp(r, c) = spec.bar_amplitude;
        }
      break;
    }

    case SampleKind::SmoothRandom: {
      if (!(spec.phase_std >= 0) || !(spec.correlation_px > 0))
        throw InvalidArgument("synth_sample: bad smooth_random parameters");
      phase = smooth_noise(size, spec.correlation_px, rng);
      normalize_std(phase, spec.phase_std);
      for (double& v : phase.data()) v = wrap_phase(v);
      if (spec.amplitude_depth > 0) {
        if (spec.amplitude_depth > 1) throw InvalidArgument("synth_sample: depth must be <= 1");
        RealImage s = smooth_noise(size, spec.correlation_px, rng);
        const double lo = s.min(), hi = s.max();
        for (std::size_t i = 0; i < s.size(); ++i) {
          const double t = hi > lo ? (s[i] - lo) / (hi - lo) : 0.0;
          amp[i] = 1.0 - spec.amplitude_depth * t;
        }
      }
      break;
    }

    case SampleKind::TwoPoint: {
      if (spec.point_px < 1 || !(spec.separation_px >= spec.point_px))
        throw InvalidArgument("synth_sample: bad two_point geometry");
      if (!(spec.point_amplitude >= 0 && spec.point_amplitude <= 1))
        throw InvalidArgument("synth_sample: point amplitude must lie in [0, 1]");
      const int sep = static_cast<int>(std::lround(spec.separation_px));
      const int row = size / 2;
      for (int left : {size / 2 - sep / 2, size / 2 - sep / 2 + sep})
        for (int r = row; r < row + spec.point_px; ++r)
          for (int c = left; c < left + spec.point_px; ++c) amp(r, c) = spec.point_amplitude;
      break;
    }
  }

  return {ComplexField::from_polar(amp, phase, cfg.sr_pitch_um), used};
}

void NoiseSpec::validate() const {
  if (!(gaussian_sigma >= 0 && gaussian_sigma < 1))
    throw InvalidArgument("noise sigma must lie in [0, 1)");
  if (quantization_bits != 0 && quantization_bits != 8 && quantization_bits != 16)
    throw InvalidArgument("quantization bits must be 0, 8 or 16");
}

void CaptureGeometry::validate() const {
  if (z2_list_um.empty()) throw InvalidArgument("capture geometry: empty z2 list");
  for (double z : z2_list_um)
    if (!(z >= 100.0 && z <= 2000.0))
      throw InvalidArgument("capture geometry: z2 outside [100, 2000] um");
  if (!lateral_shifts_um.empty() && lateral_shifts_um.size() != z2_list_um.size())
    throw InvalidArgument("capture geometry: shift list length differs from z2 list");
}

CaptureGeometry CaptureGeometry::linear(double z2_start_um, double step_um, int count) {
  CaptureGeometry g;
  for (int i = 0; i < count; ++i) g.z2_list_um.push_back(z2_start_um + i * step_um);
  return g;
}

std::vector<double> HologramStack::z2_values() const {
  std::vector<double> z;
  for (const auto& h : holograms) z.push_back(h.z2_um);
  return z;
}

Hologram capture(const SampleObject& sample, double z2_um, const OpticalConfig& cfg,
                 const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  Hologram h;
  h.z2_um = z2_um;
  h.intensity = propagate(sample.transmittance, z2_um, cfg).intensity();
  apply_noise(h.intensity, noise, rng);
  return h;
}

HologramStack capture_multiheight(const SampleObject& sample, const CaptureGeometry& geometry,
                                  const OpticalConfig& cfg, const NoiseSpec& noise, Rng& rng) {
  geometry.validate();
  HologramStack stack;
  for (std::size_t i = 0; i < geometry.z2_list_um.size(); ++i) {
    Hologram h = capture(sample, geometry.z2_list_um[i], cfg, NoiseSpec{}, rng);
    if (!geometry.lateral_shifts_um.empty()) {
      const auto [dx, dy] = geometry.lateral_shifts_um[i];
      h.intensity = fourier_shift(h.intensity, dy / cfg.sr_pitch_um, dx / cfg.sr_pitch_um);
      h.dx_um = dx;
      h.dy_um = dy;
    }
    apply_noise(h.intensity, noise, rng);
    stack.holograms.push_back(std::move(h));
  }
  return stack;
}

RealImage bin_box(const RealImage& image, int factor) {
  if (factor < 1 || image.height() % factor != 0 || image.width() % factor != 0)
    throw InvalidArgument("bin_box: image size must be a multiple of the factor");
  const int h = image.height() / factor, w = image.width() / factor;
  RealImage out(h, w);
  const double norm = 1.0 / (static_cast<double>(factor) * factor);
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c) out(r / factor, c / factor) += image(r, c);
  for (double& v : out.data()) v *= norm;
  return out;
}

RealImage fourier_shift(const RealImage& image, double dy_px, double dx_px) {
  if (dy_px == 0.0 && dx_px == 0.0) return image;
  const int h = image.height(), w = image.width();
  std::vector<std::complex<double>> buf(image.data().begin(), image.data().end());
  fft2(buf, h, w, FftDirection::Forward);
  for (int r = 0; r < h; ++r) {
    const double fy = (r < (h + 1) / 2 ? r : r - h) / static_cast<double>(h);
    for (int c = 0; c < w; ++c) {
      const double fx = (c < (w + 1) / 2 ? c : c - w) / static_cast<double>(w);
      const double ph = -2.0 * kPi * (fy * dy_px + fx * dx_px);
      buf[static_cast<std::size_t>(r) * w + c] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
  }
  fft2(buf, h, w, FftDirection::Inverse);
  RealImage out(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
  return out;
}

std::vector<SrFrame> capture_sr_grid(const SampleObject& sample, double z2_um,
                                     const OpticalConfig& cfg, int factor,
                                     const NoiseSpec& noise, Rng& rng, double jitter_um) {
  noise.validate();
  if (factor != cfg.sr_factor())
    throw InvalidArgument("capture_sr_grid: factor must equal sensor pitch / sr pitch");
  const RealImage high = propagate(sample.transmittance, z2_um, cfg).intensity();
  const double p = cfg.sr_pitch_um;
  std::vector<SrFrame> frames;
  for (int iy = 0; iy < factor; ++iy) {
    for (int ix = 0; ix < factor; ++ix) {
      double dy = iy * p, dx = ix * p;
      if (jitter_um > 0 && (iy != 0 || ix != 0)) {
        dy += rng.uniform(-jitter_um, jitter_um);
        dx += rng.uniform(-jitter_um, jitter_um);
      }
      SrFrame f;
      f.dx_um = dx;
      f.dy_um = dy;
      f.image = bin_box(fourier_shift(high, dy / p, dx / p), factor);
      apply_noise(f.image, noise, rng);
      frames.push_back(std::move(f));
    }
  }
  return frames;
}

void write_stack(const std::filesystem::path& dir, const HologramStack& stack,
                 const NoiseSpec& noise, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const Hologram& h = stack.holograms[i];
    char name[32];
    std::snprintf(name, sizeof name, "holo_%02zu.htf", i);
    write_tensor(dir / name, to_tensor(h.intensity, DType::F32));
    manifest << i << '\t' << format_double(h.z2_um) << '\t' << format_double(h.dx_um) << '\t'
             << format_double(h.dy_um) << '\t' << format_double(noise.gaussian_sigma) << '\t'
             << seed << '\n';
  }
  write_text_atomic(dir / "manifest.tsv", manifest.str());
}

HologramStack read_stack(const std::filesystem::path& dir) {
  std::istringstream in(read_text(dir / "manifest.tsv"));
  HologramStack stack;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t index;
    Hologram h;
    double sigma;
    std::uint64_t seed;
    if (!(fields >> index >> h.z2_um >> h.dx_um >> h.dy_um >> sigma >> seed))
      throw IoError("malformed manifest line in " + (dir / "manifest.tsv").string());
    char name[32];
    std::snprintf(name, sizeof name, "holo_%02zu.htf", index);
    h.intensity = image_from_tensor(read_tensor(dir / name));
    stack.holograms.push_back(std::move(h));
  }
  if (stack.holograms.empty()) throw IoError("empty hologram manifest in " + dir.string());
  return stack;
}

}  // namespace holo
