#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holo/core/image.hpp"
#include "holo/core/optical_config.hpp"
#include "holo/metrics.hpp"
#include "holo/nn/model.hpp"
#include "holo/simulate.hpp"

namespace holo::nn {

/// MS-SSIM of two one-channel tensors recorded on the tape. Uses the default
/// stabilizer relation C3 = C2 / 2; the dynamic range must be given or is
/// taken from b's current value (as a constant).
Var msssim_var(Var a, Var b, const MsssimParams& params);

struct GeneratorLossTerms {
  Var total;
  Var mae;
  Var msssim_loss;  // 1 - mean over channels of per-channel MS-SSIM
  Var adversarial;  // (D(y_hat) - 1)^2, absent when gamma = 0
};

/// alpha * MAE + beta * (1 - MS-SSIM) + gamma * (D(y_hat) - 1)^2.
/// d_of_y_hat may be an empty Var when gamma is 0.
GeneratorLossTerms generator_loss_var(Var y_hat, Var y, Var d_of_y_hat, const LossWeights& w,
                                      const MsssimParams& params);
Var discriminator_loss_var(Var d_of_y_hat, Var d_of_y);

Tensor4 field_to_tensor(const ComplexField& field);
ComplexField tensor_to_field(const Tensor4& t, double pitch_um);

struct TrainSample {
  std::vector<Tensor4> inputs;  // candidate sequence elements, (1, 2, H, W)
  Tensor4 target;               // (1, 2, H, W)
};

struct EpochLosses {
  int epoch = 0;
  double loss_g = 0;
  double mae = 0;
  double msssim_loss = 0;
  double adversarial = 0;
  double loss_d = 0;
};

struct TrainOptions {
  int epochs = 1;
  LossWeights weights{};
  MsssimParams msssim{};
  AdamConfig gen_adam{5e-5, 0.9, 0.999, 1e-8, 0.97};
  AdamConfig disc_adam{1e-6, 0.9, 0.999, 1e-8, 0.97};
  std::uint64_t seed = 0;
};

struct TrainResult {
  ParamStore generator;
  ParamStore discriminator;
  std::vector<EpochLosses> history;
  double initial_mae = 0;  // mean training MAE at initialization
};

/// Alternating generator / discriminator Adam updates, one sample per step.
/// Every step draws m_train distinct inputs of the sample at random. With
/// gamma = 0 the discriminator does not influence the generator and is left
/// untouched. Throws NumericalError naming the epoch on divergence.
TrainResult train_toy(const std::vector<TrainSample>& data, const GeneratorConfig& gen,
                      const DiscriminatorConfig& disc, const TrainOptions& opts);

/// Mean MAE of the generator over a dataset using the first m_train inputs.
double dataset_mae(const GeneratorConfig& gen, const ParamStore& params,
                   const std::vector<TrainSample>& data);

std::string loss_history_csv(const std::vector<EpochLosses>& history);

/// Zero-phase back-propagation of every hologram to z_bar, replication padding
/// to m_train, generator pass, channels reassembled as a field.
ComplexField infer_rh_m(const GeneratorConfig& gen, const ParamStore& params,
                        const std::vector<RealImage>& holograms, double z_bar_um,
                        const OpticalConfig& cfg);

/// Raw holograms encoded as (sqrt(I), 0) fed to a dilation-2 generator.
ComplexField infer_rh_md(const GeneratorConfig& gen, const ParamStore& params,
                         const std::vector<RealImage>& holograms, const OpticalConfig& cfg);

Tensor4 rh_md_encode(const RealImage& hologram);

/// Synthetic training set: `count` samples, each imaged at `heights` random
/// distances uniform in [z_min, z_max].
struct ToyDataSpec {
  int count = 100;
  int size = 64;
  int heights = 8;
  double z_min_um = 350.0;
  double z_max_um = 550.0;
  double z_bar_um = 450.0;
  bool raw_inputs = false;  // RH-MD style inputs instead of back-propagated fields
  SampleSpec sample{};
  NoiseSpec noise{};
};

struct ToySample {
  ComplexField truth;
  HologramStack stack;
};

std::vector<ToySample> make_toy_samples(const ToyDataSpec& spec, const OpticalConfig& cfg,
                                        std::uint64_t seed);
TrainSample to_train_sample(const ToySample& s, const ToyDataSpec& spec, const OpticalConfig& cfg);

}  // namespace holo::nn
