#include "holo/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "holo/core/error.hpp"

namespace holo {

RealImage::RealImage(int height, int width, double fill) : height_(height), width_(width) {
  if (height <= 0 || width <= 0) throw InvalidArgument("RealImage: dimensions must be positive");
  data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

RealImage::RealImage(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height <= 0 || width <= 0) throw InvalidArgument("RealImage: dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
    throw InvalidArgument("RealImage: data length does not match height x width");
}

double RealImage::mean() const {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

double RealImage::min() const { return *std::min_element(data_.begin(), data_.end()); }

double RealImage::max() const { return *std::max_element(data_.begin(), data_.end()); }

bool RealImage::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

ComplexField::ComplexField(int height, int width, double pitch_um)
    : re_(height, width), im_(height, width), pitch_um_(pitch_um) {
  if (!(pitch_um > 0)) throw InvalidArgument("ComplexField: pitch must be positive");
}

ComplexField::ComplexField(RealImage re, RealImage im, double pitch_um)
    : re_(std::move(re)), im_(std::move(im)), pitch_um_(pitch_um) {
  if (!re_.same_shape(im_)) throw InvalidArgument("ComplexField: re/im shape mismatch");
  if (!(pitch_um > 0)) throw InvalidArgument("ComplexField: pitch must be positive");
}

ComplexField ComplexField::from_polar(const RealImage& amplitude, const RealImage& phase,
                                      double pitch_um) {
  if (!amplitude.same_shape(phase)) throw InvalidArgument("from_polar: shape mismatch");
  ComplexField f(amplitude.height(), amplitude.width(), pitch_um);
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    f.re_[i] = amplitude[i] * std::cos(phase[i]);
    f.im_[i] = amplitude[i] * std::sin(phase[i]);
  }
  return f;
}

ComplexField ComplexField::from_real(const RealImage& re, double pitch_um) {
  return ComplexField(re, RealImage(re.height(), re.width()), pitch_um);
}

ComplexField ComplexField::from_complex(int height, int width, double pitch_um,
                                        std::span<const std::complex<double>> values) {
  ComplexField f(height, width, pitch_um);
  if (values.size() != f.size()) throw InvalidArgument("from_complex: length mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) f.set(i, values[i]);
  return f;
}

RealImage ComplexField::amplitude() const {
  RealImage out(height(), width());
  for (std::size_t i = 0; i < size(); ++i) out[i] = modulus({re_[i], im_[i]});
  return out;
}

RealImage ComplexField::phase() const {
  RealImage out(height(), width());
  for (std::size_t i = 0; i < size(); ++i) out[i] = wrap_phase(std::atan2(im_[i], re_[i]));
  return out;
}

RealImage ComplexField::intensity() const {
  RealImage out(height(), width());
  for (std::size_t i = 0; i < size(); ++i) out[i] = re_[i] * re_[i] + im_[i] * im_[i];
  return out;
}

std::vector<std::complex<double>> ComplexField::to_complex() const {
  std::vector<std::complex<double>> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = {re_[i], im_[i]};
  return out;
}

double wrap_phase(double phi) {
  constexpr double kPi = std::numbers::pi;
  double w = std::remainder(phi, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

}  // namespace holo
