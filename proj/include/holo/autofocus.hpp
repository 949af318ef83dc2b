#pragma once

#include <vector>

#include "holo/core/image.hpp"
#include "holo/core/optical_config.hpp"

namespace holo {

struct FocusSearch {
  double z_min_um = 300.0;
  double z_max_um = 600.0;
  double coarse_step_um = 5.0;
  double refine_tol_um = 0.1;

  void validate() const;
};

/// sqrt(std / mean) with the population standard deviation; 0 for a zero mean.
double tamura(const RealImage& image);

/// Magnitude of the central-difference gradient (one-sided at the borders).
RealImage gradient_magnitude(const RealImage& image);

/// Tamura coefficient of the gradient of the amplitude obtained by
/// back-propagating sqrt(I) with zero phase by z_um.
double focus_score(const RealImage& hologram, double z_um, const OpticalConfig& cfg);

struct FocusResult {
  double z_um = 0.0;
  double score = 0.0;
  std::vector<double> coarse_z;
  std::vector<double> coarse_scores;
  int evaluations = 0;
};

/// Coarse scan over [z_min, z_max] followed by golden-section refinement inside
/// the bracket around the best coarse sample. Ties resolve to the smaller z.
FocusResult autofocus_scan(const RealImage& hologram, const FocusSearch& search,
                           const OpticalConfig& cfg);

double autofocus(const RealImage& hologram, const FocusSearch& search, const OpticalConfig& cfg);

}  // namespace holo
