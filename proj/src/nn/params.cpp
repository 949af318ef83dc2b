#include "holo/nn/params.hpp"

#include <cmath>
#include <sstream>

#include "holo/core/error.hpp"
#include "holo/core/htf.hpp"
#include "holo/core/io.hpp"

namespace holo::nn {

Parameter& ParamStore::add(const std::string& name, Tensor4 value) {
  if (contains(name)) throw InvalidArgument("duplicate parameter " + name);
  index_[name] = params_.size();
  Tensor4 grad(value.n(), value.c(), value.h(), value.w());
  params_.push_back({name, std::move(value), std::move(grad)});
  return params_.back();
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter " + name);
  return params_[it->second];
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter " + name);
  return params_[it->second];
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_)
    for (double& g : p.grad.data()) g = 0.0;
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (params_[i].name != other[i].name || !(params_[i].value == other[i].value)) return false;
  return true;
}

void adam_step(AdamState& s, ParamStore& params) {
  if (s.m.empty()) {
    for (const auto& p : params) {
      s.m.emplace_back(p.value.size(), 0.0);
      s.v.emplace_back(p.value.size(), 0.0);
    }
  }
  if (s.m.size() != params.size()) throw InvalidArgument("adam: parameter count changed");
  ++s.step;
  const AdamConfig& c = s.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    if (s.m[k].size() != p.value.size() || !p.grad.same_shape(p.value))
      throw InvalidArgument("adam: shape mismatch for " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      s.m[k][i] = c.beta1 * s.m[k][i] + (1.0 - c.beta1) * g;
      s.v[k][i] = c.beta2 * s.v[k][i] + (1.0 - c.beta2) * g * g;
      const double mh = s.m[k][i] / bc1, vh = s.v[k][i] / bc2;
      p.value[i] -= s.lr * mh / (std::sqrt(vh) + c.eps);
    }
  }
}

void save_checkpoint(const std::filesystem::path& dir, const ParamStore& params,
                     const std::map<std::string, std::string>& header) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  for (const auto& p : params) {
    HtfTensor t;
    t.dtype = DType::F64;
    t.dims = {static_cast<std::uint32_t>(p.value.n()), static_cast<std::uint32_t>(p.value.c()),
              static_cast<std::uint32_t>(p.value.h()), static_cast<std::uint32_t>(p.value.w())};
    t.values.assign(p.value.data().begin(), p.value.data().end());
    write_tensor(dir / (p.name + ".htf"), t);
    manifest << p.name << '\t' << p.value.shape_string() << "\tf64\n";
  }
  write_text_atomic(dir / "manifest.tsv", manifest.str());
  std::ostringstream cfg;
  for (const auto& [k, v] : header) cfg << k << " = " << v << '\n';
  write_text_atomic(dir / "model.cfg", cfg.str());
}

ParamStore load_checkpoint(const std::filesystem::path& dir,
                           std::map<std::string, std::string>* header) {
  ParamStore params;
  std::istringstream manifest(read_text(dir / "manifest.tsv"));
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream f(line);
    std::string name, dims, dtype;
    if (!std::getline(f, name, '\t') || !std::getline(f, dims, '\t') || !std::getline(f, dtype))
      throw IoError("malformed checkpoint manifest line: " + line);
    const HtfTensor t = read_tensor(dir / (name + ".htf"));
    if (t.dims.size() != 4 || t.dtype != DType::F64)
      throw IoError("checkpoint tensor " + name + " is not a rank-4 f64 tensor");
    Tensor4 v(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), static_cast<int>(t.dims[2]),
              static_cast<int>(t.dims[3]), t.values);
    if (v.shape_string() != dims) throw IoError("checkpoint manifest dims disagree for " + name);
    params.add(name, std::move(v));
  }
  if (header) {
    header->clear();
    std::istringstream cfg(read_text(dir / "model.cfg"));
    while (std::getline(cfg, line)) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      (*header)[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  return params;
}

Tensor4 init_weight(int out, int in, int kh, int kw, Rng& rng) {
  Tensor4 w(out, in, kh, kw);
  const double bound = std::sqrt(6.0 / (static_cast<double>(in) * kh * kw));
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

}  // namespace holo::nn
