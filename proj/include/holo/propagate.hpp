#pragma once

#include <complex>
#include <vector>

#include "holo/core/image.hpp"
#include "holo/core/optical_config.hpp"

namespace holo {

/// Spatial frequencies (cycles/um) of an N x M grid in DFT order. The grid is
/// separable, so only the per-axis vectors are stored.
struct FrequencyGrid {
  int height = 0;
  int width = 0;
  double pitch_um = 1.0;
  std::vector<double> fx;  // length width
  std::vector<double> fy;  // length height

  static FrequencyGrid make(int height, int width, double pitch_um);
};

/// Band-limited angular-spectrum transfer function for a propagation by dz_um.
///
/// H = exp(i 2 pi dz sqrt((n/lambda)^2 - fx^2 - fy^2)) on the propagating band,
/// zero on the evanescent region and outside the per-axis band limit
/// f_lim = 1 / (lambda_m sqrt((2 dz / (N p))^2 + 1)), lambda_m = lambda / n.
std::vector<std::complex<double>> transfer_function(const FrequencyGrid& grid, double dz_um,
                                                    const OpticalConfig& cfg);

struct PropagateOptions {
  /// Pad to 2x per axis with edge replication, propagate, crop back.
  bool pad = false;
};

/// Angular-spectrum propagation of `field` by dz_um (negative = back-propagation).
/// The field pitch must equal cfg.sr_pitch_um.
ComplexField propagate(const ComplexField& field, double dz_um, const OpticalConfig& cfg,
                       PropagateOptions options = {});

/// Holds the spectrum of one field so it can be propagated to many distances
/// with one inverse DFT each. Used by focus scans.
class SpectrumPropagator {
 public:
  SpectrumPropagator(const ComplexField& field, const OpticalConfig& cfg);

  ComplexField propagate(double dz_um) const;

  /// Same field as propagate(), written row-major into `out` (resized as
  /// needed) without the finiteness check. For tight loops that reuse `out`.
  void propagate_into(double dz_um, std::vector<std::complex<double>>& out) const;

  int height() const noexcept { return grid_.height; }
  int width() const noexcept { return grid_.width; }

 private:
  OpticalConfig cfg_;
  FrequencyGrid grid_;
  std::vector<std::complex<double>> spectrum_;
  std::vector<double> kz_;  // axial frequency, negative on the evanescent region
};

}  // namespace holo
