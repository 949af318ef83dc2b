#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "holo/core/image.hpp"

namespace holo {

/// Binary 8-bit PGM ("P5"). Each value v maps to
/// round(255 * clamp((v - lo) / (hi - lo), 0, 1)), halves rounded up.
std::vector<std::uint8_t> export_pgm(const RealImage& image, double lo, double hi);

void write_pgm(const std::filesystem::path& path, const RealImage& image, double lo, double hi);

}  // namespace holo
