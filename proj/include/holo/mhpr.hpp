#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "holo/autofocus.hpp"
#include "holo/core/image.hpp"
#include "holo/core/optical_config.hpp"
#include "holo/simulate.hpp"

namespace holo {

/// propagate(sqrt(I) + 0i, -z_bar). The field input of the networks and the
/// single-hologram baseline.
ComplexField backpropagate_zero_phase(const RealImage& hologram, double z_bar_um,
                                      const OpticalConfig& cfg);

enum class Traversal {
  Ascending,  // h1 -> hM, then back to h1; heights must be strictly increasing
  PingPong,   // h1 -> hM -> h1 visiting every height on the way down too
  AsGiven,    // stack order, then back to the first entry; heights must be distinct
};

struct MhprOptions {
  int max_iters = 30;
  int min_iters = 10;
  double rel_tol = 1e-4;
  Traversal traversal = Traversal::Ascending;
  /// Used only when the sample distance has to be found by autofocus.
  FocusSearch focus{};

  void validate() const;
};

struct ReconResult {
  ComplexField field;  // at the sample plane
  std::vector<double> residual_history;
  int iterations_run = 0;
  double z2_used_um = 0.0;
  bool converged = false;  // stopped by rel_tol rather than max_iters
};

/// Multi-height phase retrieval. heights_um[i] is the sensor position of
/// stack.holograms[i]; the retrieved field at heights_um[0] is finally
/// propagated by -z2_sample_um. When z2_sample_um is empty it is estimated
/// by autofocus of the first hologram.
ReconResult mhpr(const HologramStack& stack, const std::vector<double>& heights_um,
                 std::optional<double> z2_sample_um, const MhprOptions& opts,
                 const OpticalConfig& cfg);

/// Heights for stacks recorded at unknown distances: autofocus of every hologram.
std::vector<double> estimate_heights(const HologramStack& stack, const FocusSearch& search,
                                     const OpticalConfig& cfg);

/// RMS over all heights and pixels of |propagate(field, h - h1)| - sqrt(I_h),
/// where `field` lives at heights_um[0].
double hologram_residual(const ComplexField& field, const HologramStack& stack,
                         const std::vector<double>& heights_um, const OpticalConfig& cfg);

/// Field as complex64 HTF at `path`, residual history (one value per line) at
/// `path` with the extension replaced by ".residuals.txt".
void write_recon(const std::filesystem::path& path, const ReconResult& result);
std::filesystem::path residual_sidecar_path(const std::filesystem::path& path);

}  // namespace holo
