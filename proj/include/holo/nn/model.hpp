#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "holo/core/rng.hpp"
#include "holo/nn/params.hpp"
#include "holo/nn/tape.hpp"

namespace holo::nn {

struct GeneratorConfig {
  int base = 4;       // 20 for RH-M, 16 for RH-MD at full scale
  int scales = 4;
  int dilation = 1;   // 2 for RH-MD
  int in_channels = 2;
  int out_channels = 2;
  int m_train = 2;

  void validate() const;
  /// Width of conv layer i (1 or 2) of encoder block k (1-based): base * 2^(k-3+i).
  int width(int k, int i) const;
};

struct DiscriminatorConfig {
  int base = 20;
  int blocks = 5;
  int hidden = 64;
  int in_channels = 2;
  int height = 64;
  int width = 64;

  void validate() const;
  int block_width(int k) const;  // base * 2^(k-1)
};

enum class LayerKind { Conv, Dense };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Conv;
  int in = 0;
  int out = 0;
  int kernel = 3;
  int dilation = 1;

  std::size_t parameter_count() const;
};

/// Layer table of the recurrent U-Net generator, in parameter order:
/// enc.k.conv{1,2}, cgru.k.{z,r,h}, skip.k, up.k, dec.k.conv{1,2}, out.
std::vector<LayerSpec> generator_layers(const GeneratorConfig& cfg);
/// disc.k.conv{1,2}, dense1, dense2.
std::vector<LayerSpec> discriminator_layers(const DiscriminatorConfig& cfg);

std::size_t count_parameters(const std::vector<LayerSpec>& layers);
std::size_t count_parameters(const GeneratorConfig& cfg);
std::size_t count_parameters(const DiscriminatorConfig& cfg);

/// "<name>.weight" and "<name>.bias" for every layer.
ParamStore init_params(const std::vector<LayerSpec>& layers, Rng& rng);

/// Binds parameters of a store to a tape. A const store yields constants.
class Binder {
 public:
  Binder(Tape& tape, ParamStore& store) : tape_(tape), mut_(&store), const_(&store) {}
  Binder(Tape& tape, const ParamStore& store) : tape_(tape), const_(&store) {}

  Var operator()(const std::string& name);
  Tape& tape() { return tape_; }

 private:
  Tape& tape_;
  ParamStore* mut_ = nullptr;
  const ParamStore* const_;
  std::vector<std::pair<std::string, Var>> cache_;
};

Var conv_layer(Binder& p, const std::string& name, Var x, int dilation);

/// z = sigmoid(conv([h; x])), r = sigmoid(conv([h; x])),
/// h~ = tanh(conv([r*h; x])), h' = (1 - z) * h + z * h~.
Var cgru_step(Binder& p, const std::string& prefix, Var h, Var x, int dilation);

/// Runs the encoder and CGRU skip blocks over the whole sequence (state starts
/// at zero) and decodes the final state. Inputs are (1, in_channels, H, W)
/// with H, W divisible by 2^(scales-1).
Var generator_forward(const GeneratorConfig& cfg, Binder& p, const std::vector<Var>& inputs);
Tensor4 generator_apply(const GeneratorConfig& cfg, const ParamStore& params,
                        const std::vector<Tensor4>& inputs);

Var discriminator_forward(const DiscriminatorConfig& cfg, Binder& p, Var image);
double discriminator_apply(const DiscriminatorConfig& cfg, const ParamStore& params,
                           const Tensor4& image);

/// Repeats the last element until the sequence has m_train entries.
template <class T>
std::vector<T> pad_sequence(std::vector<T> inputs, int m_train);

}  // namespace holo::nn

#include "holo/core/error.hpp"

namespace holo::nn {

template <class T>
std::vector<T> pad_sequence(std::vector<T> inputs, int m_train) {
  if (inputs.empty()) throw InvalidArgument("pad_sequence: empty sequence");
  if (static_cast<int>(inputs.size()) > m_train)
    throw InvalidArgument("pad_sequence: sequence longer than m_train");
  while (static_cast<int>(inputs.size()) < m_train) inputs.push_back(inputs.back());
  return inputs;
}

}  // namespace holo::nn
