#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace holo {

/// |v| without std::abs's overflow-safe (and much slower) hypot.
inline double modulus(std::complex<double> v) noexcept {
  return std::sqrt(v.real() * v.real() + v.imag() * v.imag());
}

/// Row-major real-valued 2D image.
class RealImage {
 public:
  RealImage() = default;
  RealImage(int height, int width, double fill = 0.0);
  RealImage(int height, int width, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int row, int col) { return data_[index(row, col)]; }
  double operator()(int row, int col) const { return data_[index(row, col)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double mean() const;
  double min() const;
  double max() const;
  bool all_finite() const;
  bool same_shape(const RealImage& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const RealImage&, const RealImage&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Complex optical field sampled on a regular grid with pitch in micrometers.
/// Real and imaginary parts are kept in separate planes.
class ComplexField {
 public:
  ComplexField() = default;
  ComplexField(int height, int width, double pitch_um);
  ComplexField(RealImage re, RealImage im, double pitch_um);

  static ComplexField from_polar(const RealImage& amplitude, const RealImage& phase,
                                 double pitch_um);
  /// Real field with zero imaginary part.
  static ComplexField from_real(const RealImage& re, double pitch_um);
  static ComplexField from_complex(int height, int width, double pitch_um,
                                   std::span<const std::complex<double>> values);

  int height() const noexcept { return re_.height(); }
  int width() const noexcept { return re_.width(); }
  std::size_t size() const noexcept { return re_.size(); }
  double pitch_um() const noexcept { return pitch_um_; }

  std::complex<double> at(int row, int col) const { return {re_(row, col), im_(row, col)}; }
  std::complex<double> at(std::size_t i) const { return {re_[i], im_[i]}; }
  void set(int row, int col, std::complex<double> v) {
    re_(row, col) = v.real();
    im_(row, col) = v.imag();
  }
  void set(std::size_t i, std::complex<double> v) {
    re_[i] = v.real();
    im_[i] = v.imag();
  }

  const RealImage& re() const noexcept { return re_; }
  const RealImage& im() const noexcept { return im_; }
  RealImage& re() noexcept { return re_; }
  RealImage& im() noexcept { return im_; }

  RealImage amplitude() const;
  /// Phase in (-pi, pi].
  RealImage phase() const;
  RealImage intensity() const;
  std::vector<std::complex<double>> to_complex() const;

  bool all_finite() const { return re_.all_finite() && im_.all_finite(); }
  bool same_shape(const ComplexField& other) const noexcept { return re_.same_shape(other.re_); }

  friend bool operator==(const ComplexField&, const ComplexField&) = default;

 private:
  RealImage re_;
  RealImage im_;
  double pitch_um_ = 1.0;
};

/// Wrap an angle into (-pi, pi].
double wrap_phase(double phi);

}  // namespace holo
