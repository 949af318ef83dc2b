#include "holo/core/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "holo/core/error.hpp"
#include "holo/core/io.hpp"

namespace holo {

std::vector<std::uint8_t> export_pgm(const RealImage& image, double lo, double hi) {
  if (!(lo < hi)) throw InvalidArgument("export_pgm: lo must be < hi");
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + image.size());
  for (double v : image.data()) {
    const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    out.push_back(static_cast<std::uint8_t>(std::floor(255.0 * t + 0.5)));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const RealImage& image, double lo, double hi) {
  write_file_atomic(path, export_pgm(image, lo, hi));
}

}  // namespace holo
