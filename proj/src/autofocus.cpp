#include "holo/autofocus.hpp"

#include <cmath>
#include <numeric>

#include "holo/core/error.hpp"
#include "holo/propagate.hpp"

namespace holo {

namespace {

ComplexField zero_phase_field(const RealImage& hologram, const OpticalConfig& cfg) {
  RealImage amp(hologram.height(), hologram.width());
  for (std::size_t i = 0; i < amp.size(); ++i) {
    if (hologram[i] < 0) throw InvalidArgument("focus_score: negative hologram value");
    amp[i] = std::sqrt(hologram[i]);
  }
  return ComplexField::from_real(amp, cfg.sr_pitch_um);
}

// tamura(gradient_magnitude(amplitude)) without the intermediate images; the
// search calls this dozens of times on megapixel fields.
class Scorer {
 public:
  explicit Scorer(const SpectrumPropagator& prop) : prop_(prop) {}

  double operator()(double z_um) {
    prop_.propagate_into(-z_um, field_);
    const int h = prop_.height(), w = prop_.width();
    amp_.resize(field_.size());
    for (std::size_t i = 0; i < field_.size(); ++i) amp_[i] = modulus(field_[i]);
    grad_.resize(amp_.size());
    for (int r = 0; r < h; ++r) {
      const double* row = &amp_[static_cast<std::size_t>(r) * w];
      const double* up = r > 0 ? row - w : row;
      const double* dn = r < h - 1 ? row + w : row;
      const double sy = (r > 0 && r < h - 1) ? 0.5 : (h > 1 ? 1.0 : 0.0);
      double* g = &grad_[static_cast<std::size_t>(r) * w];
      for (int c = 1; c < w - 1; ++c) {
        const double gx = 0.5 * (row[c + 1] - row[c - 1]), gy = sy * (dn[c] - up[c]);
        g[c] = std::sqrt(gx * gx + gy * gy);
      }
      for (int c : {0, w - 1}) {
        double gx = 0;
        if (w > 1) gx = c == 0 ? row[1] - row[0] : row[c] - row[c - 1];
        const double gy = sy * (dn[c] - up[c]);
        g[c] = std::sqrt(gx * gx + gy * gy);
      }
    }
    double sum = 0;
    for (double v : grad_) sum += v;
    const double mean = sum / static_cast<double>(grad_.size());
    double s = 0;
    if (mean != 0) {
      double var = 0;
      for (double v : grad_) var += (v - mean) * (v - mean);
      s = std::sqrt(std::sqrt(var / static_cast<double>(grad_.size())) / mean);
    }
    if (!std::isfinite(s)) throw NumericalError("autofocus: non-finite focus score");
    return s;
  }

 private:
  const SpectrumPropagator& prop_;
  std::vector<std::complex<double>> field_;
  std::vector<double> amp_, grad_;
};

}  // namespace

void FocusSearch::validate() const {
  if (!(std::isfinite(z_min_um) && std::isfinite(z_max_um) && z_min_um < z_max_um))
    throw InvalidArgument("focus search: need z_min < z_max");
  if (!(coarse_step_um > 0) || !(coarse_step_um < z_max_um - z_min_um))
    throw InvalidArgument("focus search: coarse step must be positive and below the range");
  if (!(refine_tol_um > 0)) throw InvalidArgument("focus search: refine tolerance must be > 0");
}

double tamura(const RealImage& image) {
  if (image.empty()) throw InvalidArgument("tamura: empty image");
  double sum = 0;
  for (double v : image.data()) {
    if (v < 0) throw InvalidArgument("tamura: negative value");
    sum += v;
  }
  const double mean = sum / static_cast<double>(image.size());
  if (mean == 0) return 0.0;
  double var = 0;
  for (double v : image.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(image.size());
  return std::sqrt(std::sqrt(var) / mean);
}

RealImage gradient_magnitude(const RealImage& a) {
  const int h = a.height(), w = a.width();
  RealImage g(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double gx = 0, gy = 0;
      if (w > 1) {
        if (c == 0) gx = a(r, 1) - a(r, 0);
        else if (c == w - 1) gx = a(r, c) - a(r, c - 1);
        else gx = 0.5 * (a(r, c + 1) - a(r, c - 1));
      }
      if (h > 1) {
        if (r == 0) gy = a(1, c) - a(0, c);
        else if (r == h - 1) gy = a(r, c) - a(r - 1, c);
        else gy = 0.5 * (a(r + 1, c) - a(r - 1, c));
      }
      g(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

double focus_score(const RealImage& hologram, double z_um, const OpticalConfig& cfg) {
  if (!std::isfinite(z_um)) throw InvalidArgument("focus_score: non-finite distance");
  const SpectrumPropagator prop(zero_phase_field(hologram, cfg), cfg);
  return Scorer(prop)(z_um);
}

FocusResult autofocus_scan(const RealImage& hologram, const FocusSearch& search,
                           const OpticalConfig& cfg) {
  search.validate();
  const SpectrumPropagator prop(zero_phase_field(hologram, cfg), cfg);
  Scorer score_field(prop);
  FocusResult res;

  const int steps =
      static_cast<int>(std::floor((search.z_max_um - search.z_min_um) / search.coarse_step_um + 1e-9));
  for (int i = 0; i <= steps; ++i) res.coarse_z.push_back(search.z_min_um + i * search.coarse_step_um);
  if (search.z_max_um - res.coarse_z.back() > 1e-9) res.coarse_z.push_back(search.z_max_um);
  for (double z : res.coarse_z) res.coarse_scores.push_back(score_field(z));
  res.evaluations = static_cast<int>(res.coarse_z.size());

  std::size_t best = 0;
  for (std::size_t i = 1; i < res.coarse_scores.size(); ++i)
    if (res.coarse_scores[i] > res.coarse_scores[best]) best = i;
  res.z_um = res.coarse_z[best];
  res.score = res.coarse_scores[best];

  double a = res.coarse_z[best > 0 ? best - 1 : 0];
  double b = res.coarse_z[std::min(best + 1, res.coarse_z.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = score_field(x1), f2 = score_field(x2);
  res.evaluations += 2;
  auto consider = [&](double z, double s) {
    if (s > res.score || (s == res.score && z < res.z_um)) {
      res.z_um = z;
      res.score = s;
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  while (b - a > search.refine_tol_um) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = score_field(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = score_field(x2);
      consider(x2, f2);
    }
    ++res.evaluations;
  }
  return res;
}

double autofocus(const RealImage& hologram, const FocusSearch& search, const OpticalConfig& cfg) {
  return autofocus_scan(hologram, search, cfg).z_um;
}

}  // namespace holo
