#include "holo/mhpr.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "holo/core/error.hpp"
#include "holo/core/htf.hpp"
#include "holo/core/io.hpp"
#include "holo/propagate.hpp"

namespace holo {

namespace {

std::vector<RealImage> measured_amplitudes(const HologramStack& stack) {
  std::vector<RealImage> amps;
  for (const auto& h : stack.holograms) {
    RealImage a(h.intensity.height(), h.intensity.width());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (h.intensity[i] < 0) throw InvalidArgument("mhpr: negative hologram value");
      a[i] = std::sqrt(h.intensity[i]);
    }
    amps.push_back(std::move(a));
  }
  return amps;
}

void check_stack(const HologramStack& stack, const std::vector<double>& heights) {
  if (stack.size() == 0) throw InvalidArgument("mhpr: empty stack");
  if (heights.size() != stack.size())
    throw InvalidArgument("mhpr: one height per hologram required");
  for (const auto& h : stack.holograms)
    if (!h.intensity.same_shape(stack.holograms[0].intensity))
      throw InvalidArgument("mhpr: hologram size mismatch");
  for (double z : heights)
    if (!std::isfinite(z)) throw InvalidArgument("mhpr: non-finite height");
}

// Averages the propagated amplitude with the measurement, keeping the phase.
void update_amplitude(ComplexField& field, const RealImage& measured) {
  for (std::size_t i = 0; i < field.size(); ++i) {
    const std::complex<double> v = field.at(i);
    const double a = modulus(v);
    const double target = 0.5 * (a + measured[i]);
    field.set(i, a > 0 ? v * (target / a) : std::complex<double>(target, 0.0));
  }
}

double residual_at_h1(const ComplexField& field, const std::vector<RealImage>& amps,
                      const std::vector<double>& heights, const OpticalConfig& cfg) {
  const SpectrumPropagator prop(field, cfg);
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const ComplexField v = k == 0 || heights[k] == heights[0] ? field : prop.propagate(heights[k] - heights[0]);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = modulus(v.at(i)) - amps[k][i];
      sum += d * d;
    }
    n += v.size();
  }
  return std::sqrt(sum / static_cast<double>(n));
}

std::vector<std::size_t> visit_order(std::size_t m, Traversal traversal) {
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < m; ++k) order.push_back(k);
  if (traversal == Traversal::PingPong)
    for (std::size_t k = m; k-- > 1;) order.push_back(k - 1);
  return order;
}

}  // namespace

ComplexField backpropagate_zero_phase(const RealImage& hologram, double z_bar_um,
                                      const OpticalConfig& cfg) {
  RealImage amp(hologram.height(), hologram.width());
  for (std::size_t i = 0; i < amp.size(); ++i) {
    if (hologram[i] < 0) throw InvalidArgument("backpropagate_zero_phase: negative value");
    amp[i] = std::sqrt(hologram[i]);
  }
  return propagate(ComplexField::from_real(amp, cfg.sr_pitch_um), -z_bar_um, cfg);
}

void MhprOptions::validate() const {
  if (min_iters < 1 || max_iters < min_iters)
    throw InvalidArgument("mhpr options: need 1 <= min_iters <= max_iters");
  if (!(rel_tol >= 0)) throw InvalidArgument("mhpr options: rel_tol must be >= 0");
}

ReconResult mhpr(const HologramStack& stack, const std::vector<double>& heights_um,
                 std::optional<double> z2_sample_um, const MhprOptions& opts,
                 const OpticalConfig& cfg) {
  opts.validate();
  check_stack(stack, heights_um);
  const std::size_t m = stack.size();
  if (opts.traversal == Traversal::AsGiven) {
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        if (heights_um[a] == heights_um[b]) throw InvalidArgument("mhpr: duplicate heights");
  } else {
    for (std::size_t k = 1; k < m; ++k)
      if (!(heights_um[k] > heights_um[k - 1]))
        throw InvalidArgument("mhpr: heights must be strictly increasing");
  }

  const double z2 = z2_sample_um ? *z2_sample_um
                                 : autofocus(stack.holograms[0].intensity, opts.focus, cfg);
  if (!std::isfinite(z2) || std::abs(z2 - heights_um[0]) > 200.0)
    throw InvalidArgument("mhpr: sample distance more than 200 um from the first height");

  const auto amps = measured_amplitudes(stack);
  const auto order = visit_order(m, opts.traversal);
  ComplexField u = ComplexField::from_real(amps[0], cfg.sr_pitch_um);

  ReconResult res;
  res.z2_used_um = z2;
  const int max_iters = m == 1 ? 1 : opts.max_iters;
  for (int it = 0; it < max_iters; ++it) {
    double current = heights_um[0];
    for (std::size_t k : order) {
      u = propagate(u, heights_um[k] - current, cfg);
      current = heights_um[k];
      update_amplitude(u, amps[k]);
    }
    u = propagate(u, heights_um[0] - current, cfg);
    if (!u.all_finite()) throw NumericalError("mhpr: non-finite field");

    const double r = residual_at_h1(u, amps, heights_um, cfg);
    res.residual_history.push_back(r);
    ++res.iterations_run;
    if (res.iterations_run >= opts.min_iters && res.residual_history.size() >= 2) {
      const double prev = res.residual_history[res.residual_history.size() - 2];
      if (prev == 0 || std::abs(r - prev) / prev < opts.rel_tol) {
        res.converged = true;
        break;
      }
    }
  }
  res.field = propagate(u, -z2, cfg);
  return res;
}

std::vector<double> estimate_heights(const HologramStack& stack, const FocusSearch& search,
                                     const OpticalConfig& cfg) {
  std::vector<double> heights;
  for (const auto& h : stack.holograms) heights.push_back(autofocus(h.intensity, search, cfg));
  return heights;
}

double hologram_residual(const ComplexField& field, const HologramStack& stack,
                         const std::vector<double>& heights_um, const OpticalConfig& cfg) {
  check_stack(stack, heights_um);
  if (field.height() != stack.holograms[0].intensity.height() ||
      field.width() != stack.holograms[0].intensity.width())
    throw InvalidArgument("hologram_residual: field and hologram sizes differ");
  return residual_at_h1(field, measured_amplitudes(stack), heights_um, cfg);
}

std::filesystem::path residual_sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p.replace_extension(".residuals.txt");
  return p;
}

void write_recon(const std::filesystem::path& path, const ReconResult& result) {
  write_tensor(path, to_tensor(result.field));
  std::string text;
  char buf[64];
  for (double r : result.residual_history) {
    std::snprintf(buf, sizeof buf, "%.17g\n", r);
    text += buf;
  }
  write_text_atomic(residual_sidecar_path(path), text);
}

}  // namespace holo
