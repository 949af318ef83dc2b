#pragma once

#include <cstddef>
#include <vector>

#include "holo/core/image.hpp"

namespace holo {

/// Translation of a frame relative to frame 0 in low-resolution pixels:
/// frame(x, y) ~= frame0(x - dx, y - dy).
struct PixelShift {
  double dx = 0.0;
  double dy = 0.0;
};

using ShiftSet = std::vector<PixelShift>;

/// Cross-correlation (via DFT) against frame 0 with a least-squares quadratic
/// fit to the 3x3 neighbourhood of the integer peak. The first entry is always
/// (0, 0). Throws InvalidArgument on fewer than two frames, mismatched sizes
/// or a constant frame.
ShiftSet estimate_shifts(const std::vector<RealImage>& frames);

struct ShiftAndAddStats {
  std::size_t empty_cells = 0;  // cells that received no deposit before hole filling
};

/// Nearest-cell shift-and-add onto a grid `factor` times finer than the frames.
///
/// Low-resolution pixel (r, c) of a frame with shift s lands on high-resolution
/// cell round((r - s.dy) * factor), round((c - s.dx) * factor), wrapped
/// periodically. Cells are averaged over their deposits; empty cells take the
/// value of the nearest filled cell (breadth-first over periodic 4-neighbours).
/// Cell k therefore estimates the pixel-integrated intensity over
/// [k, k + factor) of the fine grid.
RealImage shift_and_add(const std::vector<RealImage>& frames, const ShiftSet& shifts, int factor,
                        ShiftAndAddStats* stats = nullptr);

}  // namespace holo
