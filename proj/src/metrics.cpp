#include "holo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "holo/core/error.hpp"

namespace holo {

namespace {

void check_same(const RealImage& a, const RealImage& b, const char* what) {
  if (!a.same_shape(b) || a.empty())
    throw InvalidArgument(std::string(what) + ": image dimensions differ");
}

// Separable correlation with the window; 'valid' placement.
RealImage filter_valid(const RealImage& x, const std::vector<double>& g) {
  const int k = static_cast<int>(g.size());
  const int h = x.height() - k + 1, w = x.width() - k + 1;
  RealImage tmp(x.height(), w);
  for (int r = 0; r < x.height(); ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += g[t] * x(r, c + t);
      tmp(r, c) = s;
    }
  RealImage out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += g[t] * tmp(r + t, c);
      out(r, c) = s;
    }
  return out;
}

int reflect(int i, int n) {
  // symmetric boundary: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

RealImage filter_same(const RealImage& x, const std::vector<double>& g) {
  const int k = static_cast<int>(g.size()), half = k / 2;
  const int h = x.height(), w = x.width();
  RealImage tmp(h, w), out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += g[t] * x(r, reflect(c + t - half, w));
      tmp(r, c) = s;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0;
      for (int t = 0; t < k; ++t) s += g[t] * tmp(reflect(r + t - half, h), c);
      out(r, c) = s;
    }
  return out;
}

struct ScaleStats {
  double cs = 0;    // mean contrast-structure term
  double ssim = 0;  // mean luminance * contrast-structure
};

ScaleStats scale_stats(const RealImage& a, const RealImage& b, const SsimConstants& k,
                       const std::vector<double>& g) {
  RealImage aa(a.height(), a.width()), bb(a.height(), a.width()), ab(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const RealImage mu_a = filter_valid(a, g), mu_b = filter_valid(b, g);
  const RealImage s_aa = filter_valid(aa, g), s_bb = filter_valid(bb, g), s_ab = filter_valid(ab, g);
  ScaleStats st;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = s_aa[i] - ma * ma, vb = s_bb[i] - mb * mb, cov = s_ab[i] - ma * mb;
    const double lum = (2 * ma * mb + k.c1) / (ma * ma + mb * mb + k.c1);
    double cs;
    if (k.c3 == k.c2 / 2) {
      cs = (2 * cov + k.c2) / (va + vb + k.c2);
    } else {
      // contrast (2 sa sb + C2)/(va + vb + C2) times structure (cov + C3)/(sa sb + C3)
      const double sa = std::sqrt(std::max(va, 0.0)), sb = std::sqrt(std::max(vb, 0.0));
      cs = (2 * sa * sb + k.c2) / (va + vb + k.c2) * (cov + k.c3) / (sa * sb + k.c3);
    }
    st.cs += cs;
    st.ssim += lum * cs;
  }
  st.cs /= static_cast<double>(mu_a.size());
  st.ssim /= static_cast<double>(mu_a.size());
  return st;
}

double weighted_power(double x, double e) {
  if (e == 1.0) return x;
  return std::pow(std::max(x, 0.0), e);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double rmse(const RealImage& a, const RealImage& b) {
  check_same(a, b, "rmse");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

double mae(const RealImage& a, const RealImage& b) {
  check_same(a, b, "mae");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

std::vector<double> MsssimParams::scale_weights() const {
  if (scales < 1) throw InvalidArgument("msssim: scales must be >= 1");
  if (static_cast<int>(weights.size()) < scales)
    throw InvalidArgument("msssim: fewer weights than scales");
  std::vector<double> w(weights.begin(), weights.begin() + scales);
  if (static_cast<int>(weights.size()) != scales) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0)) throw InvalidArgument("msssim: weights must have a positive sum");
    for (double& x : w) x /= total;
  }
  return w;
}

SsimConstants ssim_constants(const RealImage& reference, const MsssimParams& params) {
  double r = params.dynamic_range.value_or(reference.max() - reference.min());
  if (!(r > 0)) r = 1.0;
  SsimConstants k{params.c1.value_or(std::pow(0.01 * r, 2)),
                  params.c2.value_or(std::pow(0.03 * r, 2)), 0.0};
  k.c3 = params.c3.value_or(k.c2 / 2.0);
  if (!(k.c1 > 0 && k.c2 > 0 && k.c3 > 0)) throw InvalidArgument("ssim: constants must be > 0");
  return k;
}

std::vector<double> gaussian_window(int size, double sigma) {
  if (size < 1 || !(sigma > 0)) throw InvalidArgument("gaussian_window: bad size or sigma");
  std::vector<double> g(static_cast<std::size_t>(size));
  const double c = (size - 1) / 2.0;
  double total = 0;
  for (int i = 0; i < size; ++i) total += g[i] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
  for (double& v : g) v /= total;
  return g;
}

double ssim(const RealImage& a, const RealImage& b, const MsssimParams& params) {
  check_same(a, b, "ssim");
  if (a.height() < params.window || a.width() < params.window)
    throw InvalidArgument("ssim: image smaller than the window");
  return scale_stats(a, b, ssim_constants(b, params), gaussian_window(params.window, params.sigma))
      .ssim;
}

RealImage msssim_downsample(const RealImage& image, const MsssimParams& params) {
  const RealImage f = filter_same(image, gaussian_window(params.window, params.sigma));
  const int h = image.height() / 2, w = image.width() / 2;
  RealImage out(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      out(r, c) = 0.25 * (f(2 * r, 2 * c) + f(2 * r + 1, 2 * c) + f(2 * r, 2 * c + 1) +
                          f(2 * r + 1, 2 * c + 1));
  return out;
}

int max_msssim_scales(int height, int width, const MsssimParams& params) {
  int m = 0;
  int h = height, w = width;
  while (m < params.scales && h >= params.window && w >= params.window) {
    ++m;
    h /= 2;
    w /= 2;
  }
  return m;
}

double msssim(const RealImage& a, const RealImage& b, const MsssimParams& params) {
  check_same(a, b, "msssim");
  const auto weights = params.scale_weights();
  const int m = params.scales;
  if (max_msssim_scales(a.height(), a.width(), params) < m)
    throw InvalidArgument("msssim: image too small for the requested number of scales");
  const SsimConstants k = ssim_constants(b, params);
  const auto g = gaussian_window(params.window, params.sigma);

  double result = 1.0;
  RealImage x = a, y = b;
  for (int j = 0; j < m; ++j) {
    const ScaleStats st = scale_stats(x, y, k, g);
    if (j + 1 < m) {
      result *= weighted_power(st.cs, weights[j]);
      x = msssim_downsample(x, params);
      y = msssim_downsample(y, params);
    } else {
      result *= weighted_power(st.ssim, weights[j]);
    }
  }
  return result;
}

double msssim_loss(const RealImage& a, const RealImage& b, const MsssimParams& params) {
  return 1.0 - msssim(a, b, params);
}

void LossWeights::validate() const {
  if (!(alpha >= 0 && beta >= 0 && gamma >= 0))
    throw InvalidArgument("loss weights must be non-negative");
}

double generator_loss(const RealImage& y_hat, const RealImage& y, double d_of_y_hat,
                      const LossWeights& w, const MsssimParams& params) {
  w.validate();
  double total = w.alpha * mae(y_hat, y) + w.gamma * (d_of_y_hat - 1.0) * (d_of_y_hat - 1.0);
  if (w.beta != 0) total += w.beta * msssim_loss(y_hat, y, params);
  return total;
}

double discriminator_loss(double d_of_y_hat, double d_of_y) {
  return 0.5 * d_of_y_hat * d_of_y_hat + 0.5 * (d_of_y - 1.0) * (d_of_y - 1.0);
}

ComplexField align_global_phase(const ComplexField& estimate, const ComplexField& reference) {
  if (!estimate.same_shape(reference))
    throw InvalidArgument("align_global_phase: field dimensions differ");
  std::complex<double> c = 0;
  for (std::size_t i = 0; i < estimate.size(); ++i) c += std::conj(reference.at(i)) * estimate.at(i);
  const double a = std::abs(c);
  if (a == 0) return estimate;
  const std::complex<double> rot = std::conj(c) / a;
  ComplexField out = estimate;
  for (std::size_t i = 0; i < out.size(); ++i) out.set(i, out.at(i) * rot);
  return out;
}

double phase_rmse(const ComplexField& estimate, const ComplexField& reference,
                  double support_threshold) {
  const ComplexField al = align_global_phase(estimate, reference);
  double s = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < al.size(); ++i) {
    if (std::abs(reference.at(i)) <= support_threshold) continue;
    const double d = std::arg(al.at(i) * std::conj(reference.at(i)));
    s += d * d;
    ++n;
  }
  if (n == 0) throw InvalidArgument("phase_rmse: empty support");
  return std::sqrt(s / static_cast<double>(n));
}

FieldComparison compare_fields(const std::string& name, const ComplexField& estimate,
                               const ComplexField& reference, const MsssimParams& params) {
  const ComplexField al = align_global_phase(estimate, reference);
  const RealImage ea = al.amplitude(), ra = reference.amplitude();
  const RealImage ep = al.phase(), rp = reference.phase();
  FieldComparison row;
  row.name = name;
  row.rmse_amp = rmse(ea, ra);
  row.rmse_phase = phase_rmse(estimate, reference);
  // Fixed ranges: a near-uniform reference would otherwise shrink the
  // stabilizers to its noise level.
  MsssimParams p = params;
  p.dynamic_range = params.dynamic_range.value_or(1.0);
  row.ssim_amp = ssim(ea, ra, p);
  p.scales = std::min(p.scales, max_msssim_scales(ea.height(), ea.width(), params));
  row.msssim_amp = msssim(ea, ra, p);
  p.dynamic_range = 2 * std::numbers::pi;
  row.ssim_phase = ssim(ep, rp, p);
  return row;
}

std::string comparisons_csv(const std::vector<FieldComparison>& rows) {
  std::string out = "name,rmse_amp,rmse_phase,ssim_amp,ssim_phase,msssim_amp\n";
  for (const auto& r : rows)
    out += r.name + "," + fmt(r.rmse_amp) + "," + fmt(r.rmse_phase) + "," + fmt(r.ssim_amp) + "," +
           fmt(r.ssim_phase) + "," + fmt(r.msssim_amp) + "\n";
  return out;
}

}  // namespace holo
