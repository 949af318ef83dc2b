#pragma once

#include <complex>
#include <span>

namespace holo {

enum class FftDirection { Forward, Inverse };

/// In-place 2D DFT of a row-major height x width array. The inverse transform
/// carries the 1/(height*width) normalization. Safe to call concurrently.
void fft2(std::span<std::complex<double>> data, int height, int width, FftDirection direction);

/// Unnormalized inverse 2D DFT (no 1/(height*width) factor) for spectra whose
/// columns flagged in `zero_column` (one flag per column) are entirely zero.
/// Columns are transformed first so the flagged ones can be skipped.
void ifft2_sparse_columns(std::span<std::complex<double>> data, int height, int width,
                          std::span<const char> zero_column);

}  // namespace holo
