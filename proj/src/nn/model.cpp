#include "holo/nn/model.hpp"

#include "holo/core/error.hpp"

namespace holo::nn {

namespace {

LayerSpec conv(std::string name, int in, int out, int kernel, int dilation) {
  return {std::move(name), LayerKind::Conv, in, out, kernel, dilation};
}

std::string block(const std::string& kind, int k) { return kind + "." + std::to_string(k); }

}  // namespace

void GeneratorConfig::validate() const {
  if (base < 2 || base % 2 != 0) throw InvalidArgument("generator: base must be even and >= 2");
  if (scales < 1 || scales > 8) throw InvalidArgument("generator: scales must lie in [1, 8]");
  if (dilation < 1) throw InvalidArgument("generator: dilation must be >= 1");
  if (in_channels < 1 || out_channels < 1) throw InvalidArgument("generator: bad channel counts");
  if (m_train < 1) throw InvalidArgument("generator: m_train must be >= 1");
}

int GeneratorConfig::width(int k, int i) const {
  const int e = k - 3 + i;
  return e >= 0 ? base << e : base >> -e;
}

void DiscriminatorConfig::validate() const {
  if (base < 1 || blocks < 1 || hidden < 1 || in_channels < 1)
    throw InvalidArgument("discriminator: sizes must be positive");
  const int f = 1 << blocks;
  if (height < f || width < f || height % f != 0 || width % f != 0)
    throw InvalidArgument("discriminator: input dims must be divisible by 2^blocks");
}

int DiscriminatorConfig::block_width(int k) const { return base << (k - 1); }

std::size_t LayerSpec::parameter_count() const {
  const std::size_t k2 = kind == LayerKind::Conv ? static_cast<std::size_t>(kernel) * kernel : 1;
  return static_cast<std::size_t>(out) * in * k2 + out;
}

std::vector<LayerSpec> generator_layers(const GeneratorConfig& cfg) {
  cfg.validate();
  const int s = cfg.scales, d = cfg.dilation;
  std::vector<LayerSpec> layers;
  for (int k = 1; k <= s; ++k) {
    const int in = k == 1 ? cfg.in_channels : cfg.width(k - 1, 2);
    layers.push_back(conv(block("enc", k) + ".conv1", in, cfg.width(k, 1), 3, d));
    layers.push_back(conv(block("enc", k) + ".conv2", cfg.width(k, 1), cfg.width(k, 2), 3, d));
  }
  for (int k = 1; k <= s; ++k) {
    const int c = cfg.width(k, 2);
    for (const char* gate : {".z", ".r", ".h"})
      layers.push_back(conv(block("cgru", k) + gate, 2 * c, c, 3, d));
    layers.push_back(conv(block("skip", k), c, c, 1, d));
  }
  int d_ch = cfg.width(s, 2);
  for (int k = s - 1; k >= 1; --k) {
    const int c = cfg.width(k, 2);
    layers.push_back(conv(block("up", k), d_ch, c, 3, d));
    layers.push_back(conv(block("dec", k) + ".conv1", 2 * c, c, 3, d));
    layers.push_back(conv(block("dec", k) + ".conv2", c, cfg.width(k, 1), 3, d));
    d_ch = cfg.width(k, 1);
  }
  layers.push_back(conv("out", d_ch, cfg.out_channels, 1, d));
  return layers;
}

std::vector<LayerSpec> discriminator_layers(const DiscriminatorConfig& cfg) {
  cfg.validate();
  std::vector<LayerSpec> layers;
  for (int k = 1; k <= cfg.blocks; ++k) {
    const int in = k == 1 ? cfg.in_channels : cfg.block_width(k - 1);
    layers.push_back(conv(block("disc", k) + ".conv1", in, cfg.block_width(k), 3, 1));
    layers.push_back(conv(block("disc", k) + ".conv2", cfg.block_width(k), cfg.block_width(k), 3, 1));
  }
  const int features =
      cfg.block_width(cfg.blocks) * (cfg.height >> cfg.blocks) * (cfg.width >> cfg.blocks);
  layers.push_back({"dense1", LayerKind::Dense, features, cfg.hidden, 1, 1});
  layers.push_back({"dense2", LayerKind::Dense, cfg.hidden, 1, 1, 1});
  return layers;
}

std::size_t count_parameters(const std::vector<LayerSpec>& layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

std::size_t count_parameters(const GeneratorConfig& cfg) {
  return count_parameters(generator_layers(cfg));
}

std::size_t count_parameters(const DiscriminatorConfig& cfg) {
  return count_parameters(discriminator_layers(cfg));
}

ParamStore init_params(const std::vector<LayerSpec>& layers, Rng& rng) {
  ParamStore store;
  for (const auto& l : layers) {
    const int k = l.kind == LayerKind::Conv ? l.kernel : 1;
    store.add(l.name + ".weight", init_weight(l.out, l.in, k, k, rng));
    store.add(l.name + ".bias", Tensor4(1, l.out, 1, 1));
  }
  return store;
}

Var Binder::operator()(const std::string& name) {
  for (const auto& [n, v] : cache_)
    if (n == name) return v;
  Var v = mut_ ? tape_.param(mut_->at(name)) : tape_.constant(const_->at(name).value);
  cache_.emplace_back(name, v);
  return v;
}

Var conv_layer(Binder& p, const std::string& name, Var x, int dilation) {
  return conv2d(x, p(name + ".weight"), p(name + ".bias"), dilation);
}

Var cgru_step(Binder& p, const std::string& prefix, Var h, Var x, int dilation) {
  const Var hx = concat(h, x);
  const Var z = sigmoid(conv_layer(p, prefix + ".z", hx, dilation));
  const Var r = sigmoid(conv_layer(p, prefix + ".r", hx, dilation));
  const Var cand = tanh(conv_layer(p, prefix + ".h", concat(mul(r, h), x), dilation));
  return add(mul(one_minus(z), h), mul(z, cand));
}

Var generator_forward(const GeneratorConfig& cfg, Binder& p, const std::vector<Var>& inputs) {
  cfg.validate();
  if (inputs.empty()) throw InvalidArgument("generator: empty input sequence");
  const Tensor4& first = inputs[0].value();
  const int f = 1 << (cfg.scales - 1);
  if (first.h() % f != 0 || first.w() % f != 0)
    throw InvalidArgument("generator: spatial dims must be divisible by " + std::to_string(f));
  const int d = cfg.dilation;
  Tape& tape = p.tape();

  std::vector<Var> hidden(cfg.scales);
  for (const Var& in : inputs) {
    const Tensor4& v = in.value();
    if (v.c() != cfg.in_channels) throw InvalidArgument("generator: input channel mismatch");
    if (!v.same_shape(first)) throw InvalidArgument("generator: sequence shape mismatch");
    Var x = in;
    for (int k = 1; k <= cfg.scales; ++k) {
      if (k > 1) x = avgpool2(x);
      x = leaky_relu(conv_layer(p, block("enc", k) + ".conv1", x, d));
      x = leaky_relu(conv_layer(p, block("enc", k) + ".conv2", x, d));
      Var& h = hidden[k - 1];
      if (h.tape == nullptr) {
        const Tensor4& xv = x.value();
        h = tape.constant(Tensor4(xv.n(), xv.c(), xv.h(), xv.w()));
      }
      h = cgru_step(p, block("cgru", k), h, x, d);
    }
  }

  std::vector<Var> skip(cfg.scales);
  for (int k = 1; k <= cfg.scales; ++k)
    skip[k - 1] = conv_layer(p, block("skip", k), hidden[k - 1], d);
  Var y = skip[cfg.scales - 1];
  for (int k = cfg.scales - 1; k >= 1; --k) {
    y = leaky_relu(conv_layer(p, block("up", k), upsample2(y), d));
    y = leaky_relu(conv_layer(p, block("dec", k) + ".conv1", concat(y, skip[k - 1]), d));
    y = leaky_relu(conv_layer(p, block("dec", k) + ".conv2", y, d));
  }
  return conv_layer(p, "out", y, d);  // 1x1: dilation does not change the result
}

Tensor4 generator_apply(const GeneratorConfig& cfg, const ParamStore& params,
                        const std::vector<Tensor4>& inputs) {
  Tape tape;
  Binder p(tape, params);
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  return generator_forward(cfg, p, vars).value();
}

Var discriminator_forward(const DiscriminatorConfig& cfg, Binder& p, Var image) {
  cfg.validate();
  const Tensor4& v = image.value();
  if (v.c() != cfg.in_channels || v.h() != cfg.height || v.w() != cfg.width)
    throw InvalidArgument("discriminator: input shape " + v.shape_string() +
                          " does not match the configuration");
  Var x = image;
  for (int k = 1; k <= cfg.blocks; ++k) {
    x = leaky_relu(conv_layer(p, block("disc", k) + ".conv1", x, 1));
    x = leaky_relu(conv_layer(p, block("disc", k) + ".conv2", x, 1));
    x = avgpool2(x);
  }
  x = leaky_relu(dense(x, p("dense1.weight"), p("dense1.bias")));
  return dense(x, p("dense2.weight"), p("dense2.bias"));
}

double discriminator_apply(const DiscriminatorConfig& cfg, const ParamStore& params,
                           const Tensor4& image) {
  Tape tape;
  Binder p(tape, params);
  return discriminator_forward(cfg, p, tape.constant(image)).value()[0];
}

}  // namespace holo::nn
