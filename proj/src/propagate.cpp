#include "holo/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "holo/core/error.hpp"
#include "holo/fft.hpp"

namespace holo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> axis_frequencies(int n, double pitch_um) {
  std::vector<double> f(static_cast<std::size_t>(n));
  const double df = 1.0 / (n * pitch_um);
  for (int k = 0; k < n; ++k) f[k] = (k < (n + 1) / 2 ? k : k - n) * df;
  return f;
}

double band_limit(double dz_um, int n, double pitch_um, double medium_wavelength_um) {
  const double r = 2.0 * dz_um / (n * pitch_um);
  return 1.0 / (medium_wavelength_um * std::sqrt(r * r + 1.0));
}

std::vector<double> axial_frequencies(const FrequencyGrid& grid, const OpticalConfig& cfg) {
  const double k2 = std::pow(cfg.medium_index / cfg.wavelength_um, 2);
  std::vector<double> kz(static_cast<std::size_t>(grid.height) * grid.width);
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      const double rem = k2 - grid.fx[c] * grid.fx[c] - grid.fy[r] * grid.fy[r];
      kz[static_cast<std::size_t>(r) * grid.width + c] = rem >= 0 ? std::sqrt(rem) : -1.0;
    }
  }
  return kz;
}

// out = scale * H(dz) * spectrum, with H evaluated from precomputed axial
// frequencies. One pass; the propagation loop is memory bound at 1024^2.
// Flags the columns H zeroes completely when zero_column is given.
void apply_transfer(const std::vector<std::complex<double>>& spectrum,
                    std::vector<std::complex<double>>& out, const FrequencyGrid& grid,
                    const std::vector<double>& kz, double dz_um, const OpticalConfig& cfg,
                    double scale = 1.0, std::vector<char>* zero_column = nullptr) {
  const double lim_x = band_limit(std::abs(dz_um), grid.width, grid.pitch_um,
                                  cfg.medium_wavelength_um());
  const double lim_y = band_limit(std::abs(dz_um), grid.height, grid.pitch_um,
                                  cfg.medium_wavelength_um());
  out.resize(spectrum.size());
  for (int r = 0; r < grid.height; ++r) {
    const bool row_in = std::abs(grid.fy[r]) <= lim_y;
    for (int c = 0; c < grid.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * grid.width + c;
      if (!row_in || kz[i] < 0 || std::abs(grid.fx[c]) > lim_x) {
        out[i] = 0.0;
        continue;
      }
      const double phase = kTwoPi * dz_um * kz[i];
      out[i] = spectrum[i] * std::complex<double>(scale * std::cos(phase), scale * std::sin(phase));
    }
  }
  if (zero_column) {
    zero_column->assign(static_cast<std::size_t>(grid.width), 0);
    for (int c = 0; c < grid.width; ++c) (*zero_column)[c] = std::abs(grid.fx[c]) > lim_x;
  }
}

void check_inputs(const ComplexField& field, double dz_um, const OpticalConfig& cfg) {
  if (!std::isfinite(dz_um)) throw InvalidArgument("propagate: non-finite distance");
  cfg.validate();
  if (std::abs(field.pitch_um() - cfg.sr_pitch_um) > 1e-9 * cfg.sr_pitch_um)
    throw InvalidArgument("propagate: field pitch does not match the configured sr pitch");
}

ComplexField pad_edge(const ComplexField& field) {
  const int h = field.height(), w = field.width();
  const int top = h / 2, left = w / 2;
  ComplexField out(2 * h, 2 * w, field.pitch_um());
  for (int r = 0; r < 2 * h; ++r) {
    const int sr = std::clamp(r - top, 0, h - 1);
    for (int c = 0; c < 2 * w; ++c) out.set(r, c, field.at(sr, std::clamp(c - left, 0, w - 1)));
  }
  return out;
}

ComplexField crop_center(const ComplexField& padded, int h, int w) {
  const int top = h / 2, left = w / 2;
  ComplexField out(h, w, padded.pitch_um());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.set(r, c, padded.at(r + top, c + left));
  return out;
}

}  // namespace

FrequencyGrid FrequencyGrid::make(int height, int width, double pitch_um) {
  if (height <= 0 || width <= 0 || !(pitch_um > 0))
    throw InvalidArgument("FrequencyGrid: invalid dimensions or pitch");
  return {height, width, pitch_um, axis_frequencies(width, pitch_um),
          axis_frequencies(height, pitch_um)};
}

std::vector<std::complex<double>> transfer_function(const FrequencyGrid& grid, double dz_um,
                                                    const OpticalConfig& cfg) {
  if (!std::isfinite(dz_um)) throw InvalidArgument("transfer_function: non-finite distance");
  const std::vector<std::complex<double>> ones(static_cast<std::size_t>(grid.height) * grid.width, 1.0);
  std::vector<std::complex<double>> h;
  apply_transfer(ones, h, grid, axial_frequencies(grid, cfg), dz_um, cfg);
  return h;
}

ComplexField propagate(const ComplexField& field, double dz_um, const OpticalConfig& cfg,
                       PropagateOptions options) {
  check_inputs(field, dz_um, cfg);
  if (dz_um == 0.0) return field;  // exact identity, evanescent content included
  if (options.pad) {
    const ComplexField padded = propagate(pad_edge(field), dz_um, cfg, {});
    return crop_center(padded, field.height(), field.width());
  }
  return SpectrumPropagator(field, cfg).propagate(dz_um);
}

SpectrumPropagator::SpectrumPropagator(const ComplexField& field, const OpticalConfig& cfg)
    : cfg_(cfg),
      grid_(FrequencyGrid::make(field.height(), field.width(), field.pitch_um())),
      spectrum_(field.to_complex()) {
  check_inputs(field, 0.0, cfg);
  fft2(spectrum_, grid_.height, grid_.width, FftDirection::Forward);
  kz_ = axial_frequencies(grid_, cfg_);
}

void SpectrumPropagator::propagate_into(double dz_um, std::vector<std::complex<double>>& out) const {
  if (!std::isfinite(dz_um)) throw InvalidArgument("propagate: non-finite distance");
  std::vector<char> zero_column;
  const double norm = 1.0 / (static_cast<double>(grid_.height) * grid_.width);
  apply_transfer(spectrum_, out, grid_, kz_, dz_um, cfg_, norm, &zero_column);
  ifft2_sparse_columns(out, grid_.height, grid_.width, zero_column);
}

ComplexField SpectrumPropagator::propagate(double dz_um) const {
  std::vector<std::complex<double>> work;
  propagate_into(dz_um, work);
  ComplexField out = ComplexField::from_complex(grid_.height, grid_.width, grid_.pitch_um, work);
  if (!out.all_finite()) throw NumericalError("propagate: non-finite output field");
  return out;
}

}  // namespace holo
