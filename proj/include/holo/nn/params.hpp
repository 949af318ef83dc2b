#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "holo/core/rng.hpp"
#include "holo/nn/tape.hpp"

namespace holo::nn {

/// Named parameters in insertion order. Element addresses are stable, so
/// tapes may hold pointers into the store.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Tensor4 value);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t element_count() const;
  void zero_grad();
  /// True when names, shapes and values agree exactly.
  bool same_values(const ParamStore& other) const;

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 0.97;  // learning-rate factor applied by end_epoch()
};

struct AdamState {
  AdamConfig config;
  double lr = 0.0;
  long step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  explicit AdamState(const AdamConfig& cfg = {}) : config(cfg), lr(cfg.lr) {}
  void end_epoch() { lr *= config.decay; }
};

/// Bias-corrected Adam update of every parameter from its grad.
void adam_step(AdamState& state, ParamStore& params);

/// One f64 HTF file per parameter plus manifest.tsv ("name<TAB>dims<TAB>dtype")
/// and model.cfg holding `header` as key = value lines.
void save_checkpoint(const std::filesystem::path& dir, const ParamStore& params,
                     const std::map<std::string, std::string>& header);
ParamStore load_checkpoint(const std::filesystem::path& dir,
                           std::map<std::string, std::string>* header = nullptr);

/// Fan-in scaled uniform weights, bound sqrt(6 / fan_in); zero biases.
Tensor4 init_weight(int out, int in, int kh, int kw, Rng& rng);

}  // namespace holo::nn
