#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holo/core/image.hpp"

namespace holo {

double rmse(const RealImage& a, const RealImage& b);
double mae(const RealImage& a, const RealImage& b);

/// Hyperparameters of (MS-)SSIM. Stabilizers default to C1 = (0.01 R)^2,
/// C2 = (0.03 R)^2, C3 = C2 / 2; with C3 = C2 / 2 the contrast and structure
/// terms collapse into (2 s_ab + C2) / (s_a^2 + s_b^2 + C2).
struct MsssimParams {
  int scales = 5;
  /// Per-scale exponents (beta_j = gamma_j = weights[j], alpha_m = weights[m-1]).
  /// When fewer scales are requested the leading weights are kept and
  /// renormalized to sum to one.
  std::vector<double> weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  /// Dynamic range R; when empty, max - min of the reference (second) image,
  /// or 1 if that image is constant.
  std::optional<double> dynamic_range;
  std::optional<double> c1;
  std::optional<double> c2;
  std::optional<double> c3;
  int window = 11;
  double sigma = 1.5;

  std::vector<double> scale_weights() const;
};

struct SsimConstants {
  double c1, c2, c3;
};

SsimConstants ssim_constants(const RealImage& reference, const MsssimParams& params);

/// Normalized 1D Gaussian taps of the SSIM window.
std::vector<double> gaussian_window(int size, double sigma);

/// Mean SSIM over all fully contained windows ('valid' placement).
double ssim(const RealImage& a, const RealImage& b, const MsssimParams& params = {});

/// Gaussian low-pass (same size, symmetric boundary) then 2x2 mean pooling.
RealImage msssim_downsample(const RealImage& image, const MsssimParams& params);

/// prod_{j<m} mean(cs_j)^w_j * mean(l_m cs_m)^w_m. Fractional powers of
/// negative means are taken as 0.
double msssim(const RealImage& a, const RealImage& b, const MsssimParams& params = {});
double msssim_loss(const RealImage& a, const RealImage& b, const MsssimParams& params = {});

/// Largest scale count (<= requested) an image of this size supports.
int max_msssim_scales(int height, int width, const MsssimParams& params);

struct LossWeights {
  double alpha = 3.0;
  double beta = 1.0;
  double gamma = 0.5;

  void validate() const;
};

double generator_loss(const RealImage& y_hat, const RealImage& y, double d_of_y_hat,
                      const LossWeights& w, const MsssimParams& params = {});
double discriminator_loss(double d_of_y_hat, double d_of_y);

/// Per-channel comparison of a complex estimate against a ground truth. The
/// estimate is first rotated by the constant phase that best aligns it.
struct FieldComparison {
  std::string name;
  double rmse_amp = 0;
  double rmse_phase = 0;
  double ssim_amp = 0;
  double ssim_phase = 0;
  double msssim_amp = 0;
};

ComplexField align_global_phase(const ComplexField& estimate, const ComplexField& reference);

/// RMS of the wrapped phase difference after global-phase alignment, over
/// pixels where the reference amplitude exceeds support_threshold.
double phase_rmse(const ComplexField& estimate, const ComplexField& reference,
                  double support_threshold = 0.0);

/// Amplitude SSIM / MS-SSIM use the given dynamic range or 1 (transmittance
/// amplitudes lie in [0, 1]); phase SSIM uses 2 pi. MS-SSIM drops scales the
/// image size cannot support.
FieldComparison compare_fields(const std::string& name, const ComplexField& estimate,
                               const ComplexField& reference, const MsssimParams& params = {});

/// Header row plus one row per comparison, in the given order.
std::string comparisons_csv(const std::vector<FieldComparison>& rows);

}  // namespace holo
