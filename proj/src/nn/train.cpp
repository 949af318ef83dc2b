#include "holo/nn/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "holo/core/error.hpp"
#include "holo/mhpr.hpp"

namespace holo::nn {

namespace {

struct ScaleTerms {
  Var cs;
  Var ssim;
};

ScaleTerms scale_terms(Var a, Var b, const SsimConstants& k, const std::vector<double>& g) {
  const Var mu_a = filter_valid(a, g), mu_b = filter_valid(b, g);
  const Var va = sub(filter_valid(square(a), g), square(mu_a));
  const Var vb = sub(filter_valid(square(b), g), square(mu_b));
  const Var cov = sub(filter_valid(mul(a, b), g), mul(mu_a, mu_b));
  const Var cs = div(add_scalar(scale(cov, 2.0), k.c2), add_scalar(add(va, vb), k.c2));
  const Var lum = div(add_scalar(scale(mul(mu_a, mu_b), 2.0), k.c1),
                      add_scalar(add(square(mu_a), square(mu_b)), k.c1));
  return {mean(cs), mean(mul(lum, cs))};
}

Var weighted(Var v, double e) { return e == 1.0 ? v : pow_clamped(v, e); }

RealImage plane_image(const Tensor4& t, int c) {
  RealImage img(t.h(), t.w());
  for (int y = 0; y < t.h(); ++y)
    for (int x = 0; x < t.w(); ++x) img(y, x) = t(0, c, y, x);
  return img;
}

std::vector<std::size_t> choose_distinct(std::size_t available, int m, Rng& rng) {
  std::vector<std::size_t> idx(available);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min<std::size_t>(available, static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_int(available - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

void check_finite(double v, int epoch, const char* what) {
  if (!std::isfinite(v))
    throw NumericalError(std::string("training diverged: non-finite ") + what + " in epoch " +
                         std::to_string(epoch));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Var msssim_var(Var a, Var b, const MsssimParams& params) {
  const Tensor4& av = a.value();
  if (av.c() != 1 || av.n() != 1 || !av.same_shape(b.value()))
    throw InvalidArgument("msssim_var: expects two 1x1xHxW tensors");
  const RealImage ref = plane_image(b.value(), 0);
  const SsimConstants k = ssim_constants(ref, params);
  if (k.c3 != k.c2 / 2) throw InvalidArgument("msssim_var: requires C3 = C2 / 2");
  const auto weights = params.scale_weights();
  if (max_msssim_scales(av.h(), av.w(), params) < params.scales)
    throw InvalidArgument("msssim_var: image too small for the requested number of scales");
  const auto g = gaussian_window(params.window, params.sigma);

  Var result;
  for (int j = 0; j < params.scales; ++j) {
    const ScaleTerms st = scale_terms(a, b, k, g);
    const bool last = j + 1 == params.scales;
    const Var term = weighted(last ? st.ssim : st.cs, weights[j]);
    result = result.tape ? mul(result, term) : term;
    if (!last) {
      a = avgpool2(filter_same_symmetric(a, g));
      b = avgpool2(filter_same_symmetric(b, g));
    }
  }
  return result;
}

GeneratorLossTerms generator_loss_var(Var y_hat, Var y, Var d_of_y_hat, const LossWeights& w,
                                      const MsssimParams& params) {
  w.validate();
  GeneratorLossTerms t;
  t.mae = mae(y_hat, y);
  Var total = scale(t.mae, w.alpha);
  if (w.beta != 0) {
    const int channels = y_hat.value().c();
    Var acc;
    for (int c = 0; c < channels; ++c) {
      const Var m = msssim_var(channel(y_hat, c), channel(y, c), params);
      acc = acc.tape ? add(acc, m) : m;
    }
    t.msssim_loss = one_minus(scale(acc, 1.0 / channels));
    total = add(total, scale(t.msssim_loss, w.beta));
  }
  if (w.gamma != 0) {
    if (d_of_y_hat.tape == nullptr) throw InvalidArgument("generator loss: missing D(y_hat)");
    t.adversarial = square(add_scalar(d_of_y_hat, -1.0));
    total = add(total, scale(t.adversarial, w.gamma));
  }
  t.total = total;
  return t;
}

Var discriminator_loss_var(Var d_of_y_hat, Var d_of_y) {
  return add(scale(square(d_of_y_hat), 0.5), scale(square(add_scalar(d_of_y, -1.0)), 0.5));
}

Tensor4 field_to_tensor(const ComplexField& field) {
  Tensor4 t(1, 2, field.height(), field.width());
  for (int y = 0; y < field.height(); ++y)
    for (int x = 0; x < field.width(); ++x) {
      t(0, 0, y, x) = field.re()(y, x);
      t(0, 1, y, x) = field.im()(y, x);
    }
  return t;
}

ComplexField tensor_to_field(const Tensor4& t, double pitch_um) {
  if (t.n() != 1 || t.c() != 2) throw InvalidArgument("tensor_to_field: expects 1x2xHxW");
  return ComplexField(plane_image(t, 0), plane_image(t, 1), pitch_um);
}

Tensor4 rh_md_encode(const RealImage& hologram) {
  Tensor4 t(1, 2, hologram.height(), hologram.width());
  for (int y = 0; y < hologram.height(); ++y)
    for (int x = 0; x < hologram.width(); ++x) {
      if (hologram(y, x) < 0) throw InvalidArgument("rh_md_encode: negative hologram value");
      t(0, 0, y, x) = std::sqrt(hologram(y, x));
    }
  return t;
}

double dataset_mae(const GeneratorConfig& gen, const ParamStore& params,
                   const std::vector<TrainSample>& data) {
  double total = 0;
  for (const auto& s : data) {
    std::vector<Tensor4> seq(s.inputs.begin(),
                             s.inputs.begin() + std::min<std::size_t>(s.inputs.size(), gen.m_train));
    const Tensor4 out = generator_apply(gen, params, pad_sequence(seq, gen.m_train));
    double e = 0;
    for (std::size_t i = 0; i < out.size(); ++i) e += std::abs(out[i] - s.target[i]);
    total += e / static_cast<double>(out.size());
  }
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

TrainResult train_toy(const std::vector<TrainSample>& data, const GeneratorConfig& gen,
                      const DiscriminatorConfig& disc, const TrainOptions& opts) {
  if (data.empty()) throw InvalidArgument("train_toy: empty dataset");
  if (opts.epochs < 0) throw InvalidArgument("train_toy: negative epoch count");
  opts.weights.validate();
  for (const auto& s : data) {
    if (s.inputs.empty()) throw InvalidArgument("train_toy: sample without inputs");
    for (const auto& in : s.inputs)
      if (!in.same_shape(data[0].target)) throw InvalidArgument("train_toy: samples differ in shape");
    if (!s.target.same_shape(data[0].target)) throw InvalidArgument("train_toy: samples differ in shape");
  }
  const bool adversarial = opts.weights.gamma != 0;

  const Rng root(opts.seed);
  Rng gen_init = root.split(1), disc_init = root.split(2), order_rng = root.split(3);
  TrainResult res;
  res.generator = init_params(generator_layers(gen), gen_init);
  res.discriminator = init_params(discriminator_layers(disc), disc_init);
  res.initial_mae = dataset_mae(gen, res.generator, data);

  AdamState g_opt(opts.gen_adam), d_opt(opts.disc_adam);
  std::vector<std::size_t> order(data.size());
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.uniform_int(i)]);

    EpochLosses acc;
    acc.epoch = epoch;
    for (std::size_t idx : order) {
      const TrainSample& s = data[idx];
      std::vector<Tensor4> seq;
      for (std::size_t k : choose_distinct(s.inputs.size(), gen.m_train, order_rng))
        seq.push_back(s.inputs[k]);
      seq = pad_sequence(std::move(seq), gen.m_train);

      Tensor4 fake;
      {
        Tape tape;
        Binder gp(tape, res.generator);
        Binder dp(tape, static_cast<const ParamStore&>(res.discriminator));
        std::vector<Var> in;
        for (auto& t : seq) in.push_back(tape.constant(std::move(t)));
        const Var out = generator_forward(gen, gp, in);
        const Var target = tape.constant(s.target);
        const Var d_fake = adversarial ? discriminator_forward(disc, dp, out) : Var{};
        const auto terms = generator_loss_var(out, target, d_fake, opts.weights, opts.msssim);
        const double lg = terms.total.value()[0];
        check_finite(lg, epoch, "generator loss");
        acc.loss_g += lg;
        acc.mae += terms.mae.value()[0];
        if (terms.msssim_loss.tape) acc.msssim_loss += terms.msssim_loss.value()[0];
        if (terms.adversarial.tape) acc.adversarial += terms.adversarial.value()[0];
        res.generator.zero_grad();
        tape.backward(terms.total);
        adam_step(g_opt, res.generator);
        fake = out.value();
      }
      if (adversarial) {
        Tape tape;
        Binder dp(tape, res.discriminator);
        const Var d_fake = discriminator_forward(disc, dp, tape.constant(std::move(fake)));
        const Var d_real = discriminator_forward(disc, dp, tape.constant(s.target));
        const Var ld = discriminator_loss_var(d_fake, d_real);
        check_finite(ld.value()[0], epoch, "discriminator loss");
        acc.loss_d += ld.value()[0];
        res.discriminator.zero_grad();
        tape.backward(ld);
        adam_step(d_opt, res.discriminator);
      }
    }
    const double n = static_cast<double>(data.size());
    acc.loss_g /= n;
    acc.mae /= n;
    acc.msssim_loss /= n;
    acc.adversarial /= n;
    acc.loss_d /= n;
    res.history.push_back(acc);
    g_opt.end_epoch();
    d_opt.end_epoch();
  }
  res.generator.zero_grad();
  res.discriminator.zero_grad();
  return res;
}

std::string loss_history_csv(const std::vector<EpochLosses>& history) {
  std::string out = "epoch,loss_g,mae,msssim_loss,adversarial,loss_d\n";
  for (const auto& e : history)
    out += std::to_string(e.epoch) + "," + fmt(e.loss_g) + "," + fmt(e.mae) + "," +
           fmt(e.msssim_loss) + "," + fmt(e.adversarial) + "," + fmt(e.loss_d) + "\n";
  return out;
}

ComplexField infer_rh_m(const GeneratorConfig& gen, const ParamStore& params,
                        const std::vector<RealImage>& holograms, double z_bar_um,
                        const OpticalConfig& cfg) {
  std::vector<Tensor4> seq;
  for (const auto& h : holograms) seq.push_back(field_to_tensor(backpropagate_zero_phase(h, z_bar_um, cfg)));
  return tensor_to_field(generator_apply(gen, params, pad_sequence(std::move(seq), gen.m_train)),
                         cfg.sr_pitch_um);
}

ComplexField infer_rh_md(const GeneratorConfig& gen, const ParamStore& params,
                         const std::vector<RealImage>& holograms, const OpticalConfig& cfg) {
  if (gen.dilation != 2) throw InvalidArgument("infer_rh_md: generator must use dilation 2");
  std::vector<Tensor4> seq;
  for (const auto& h : holograms) seq.push_back(rh_md_encode(h));
  return tensor_to_field(generator_apply(gen, params, pad_sequence(std::move(seq), gen.m_train)),
                         cfg.sr_pitch_um);
}

std::vector<ToySample> make_toy_samples(const ToyDataSpec& spec, const OpticalConfig& cfg,
                                        std::uint64_t seed) {
  if (spec.count < 1 || spec.heights < 1) throw InvalidArgument("toy data: empty specification");
  const Rng root(seed);
  std::vector<ToySample> out;
  for (int i = 0; i < spec.count; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    const SampleObject obj = synth_sample(spec.sample, spec.size, cfg, rng);
    CaptureGeometry geo;
    for (int k = 0; k < spec.heights; ++k) geo.z2_list_um.push_back(rng.uniform(spec.z_min_um, spec.z_max_um));
    out.push_back({obj.transmittance, capture_multiheight(obj, geo, cfg, spec.noise, rng)});
  }
  return out;
}

TrainSample to_train_sample(const ToySample& s, const ToyDataSpec& spec, const OpticalConfig& cfg) {
  TrainSample t;
  for (const auto& h : s.stack.holograms)
    t.inputs.push_back(spec.raw_inputs ? rh_md_encode(h.intensity)
                                       : field_to_tensor(backpropagate_zero_phase(h.intensity, spec.z_bar_um, cfg)));
  t.target = field_to_tensor(s.truth);
  return t;
}

}  // namespace holo::nn
