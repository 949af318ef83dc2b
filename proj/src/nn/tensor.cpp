#include "holo/nn/tensor.hpp"

#include <cmath>

#include "holo/core/error.hpp"

namespace holo::nn {

Tensor4::Tensor4(int n, int c, int h, int w, double fill) : n_(n), c_(c), h_(h), w_(w) {
  if (n <= 0 || c <= 0 || h <= 0 || w <= 0) throw InvalidArgument("Tensor4: dims must be positive");
  data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

Tensor4::Tensor4(int n, int c, int h, int w, std::vector<double> data)
    : Tensor4(n, c, h, w) {
  if (data.size() != data_.size()) throw InvalidArgument("Tensor4: data length mismatch");
  data_ = std::move(data);
}

bool Tensor4::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor4::shape_string() const {
  return std::to_string(n_) + "x" + std::to_string(c_) + "x" + std::to_string(h_) + "x" +
         std::to_string(w_);
}

}  // namespace holo::nn
