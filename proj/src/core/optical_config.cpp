#include "holo/core/optical_config.hpp"

#include <cmath>

#include "holo/core/error.hpp"

namespace holo {

void OpticalConfig::validate() const {
  if (!(wavelength_um > 0) || !std::isfinite(wavelength_um))
    throw InvalidArgument("wavelength must be positive");
  if (!(medium_index >= 1.0) || !std::isfinite(medium_index))
    throw InvalidArgument("medium index must be >= 1");
  if (!(sr_pitch_um > 0) || !(sensor_pitch_um > 0))
    throw InvalidArgument("pixel pitches must be positive");
  if (sr_pitch_um > sensor_pitch_um * (1.0 + 1e-12))
    throw InvalidArgument("sr pitch must not exceed the sensor pitch");
  const double ratio = sensor_pitch_um / sr_pitch_um;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw InvalidArgument("sensor pitch / sr pitch must be an integer");
}

int OpticalConfig::sr_factor() const {
  validate();
  return static_cast<int>(std::lround(sensor_pitch_um / sr_pitch_um));
}

OpticalConfig OpticalConfig::at_sensor_pitch() const {
  OpticalConfig c = *this;
  c.sr_pitch_um = sensor_pitch_um;
  return c;
}

}  // namespace holo
