#pragma once

namespace holo {

/// Illumination and sampling parameters shared by every optical operation.
struct OpticalConfig {
  double wavelength_um = 0.530;
  double medium_index = 1.0;
  // 2.24 / 6: the super-resolved pitch quoted as 0.37 um, kept an exact divisor.
  double sr_pitch_um = 2.24 / 6.0;
  double sensor_pitch_um = 2.24;

  /// Throws InvalidArgument unless the invariants hold (positive values,
  /// sr pitch no larger than the sensor pitch, integer ratio between them).
  void validate() const;

  /// Super-resolution factor L = sensor_pitch / sr_pitch.
  int sr_factor() const;

  /// Copy with the high-resolution pitch replaced by the sensor pitch (L = 1).
  OpticalConfig at_sensor_pitch() const;

  double medium_wavelength_um() const { return wavelength_um / medium_index; }
};

}  // namespace holo
