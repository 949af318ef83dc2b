#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace holo::nn {

/// Dense (batch, channels, height, width) array of doubles, row-major.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int n, int c, int h, int w, double fill = 0.0);
  Tensor4(int n, int c, int h, int w, std::vector<double> data);

  int n() const noexcept { return n_; }
  int c() const noexcept { return c_; }
  int h() const noexcept { return h_; }
  int w() const noexcept { return w_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  double operator()(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double* plane(int n, int c) { return data_.data() + index(n, c, 0, 0); }
  const double* plane(int n, int c) const { return data_.data() + index(n, c, 0, 0); }

  bool same_shape(const Tensor4& o) const noexcept {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }
  bool all_finite() const;
  std::string shape_string() const;

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  std::size_t index(int n, int c, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(n) * c_ + c) * h_ + y) * w_ + x;
  }

  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

}  // namespace holo::nn
