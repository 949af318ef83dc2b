#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "holo/core/image.hpp"

namespace holo {

/// Element type tags of the HTF container.
enum class DType : std::uint8_t { F32 = 1, F64 = 2, Complex64 = 3, U8 = 4, U16 = 5 };

/// In-memory form of an HTF tensor.
///
/// Values are held as doubles regardless of dtype; complex tensors store
/// interleaved (re, im) pairs, so values.size() == 2 * element_count().
struct HtfTensor {
  DType dtype = DType::F64;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;

  std::size_t element_count() const;
  friend bool operator==(const HtfTensor&, const HtfTensor&) = default;
};

// HTF layout (little-endian): "HOLO", u8 version (1), u8 dtype, u8 ndim,
// ndim x u32 dims (outermost first), row-major payload.
std::vector<std::uint8_t> encode_tensor(const HtfTensor& tensor);
HtfTensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const HtfTensor& tensor);
HtfTensor read_tensor(const std::filesystem::path& path);

HtfTensor to_tensor(const RealImage& image, DType dtype = DType::F64);
/// Stored as complex64 (interleaved f32 pairs).
HtfTensor to_tensor(const ComplexField& field);

RealImage image_from_tensor(const HtfTensor& tensor);
ComplexField field_from_tensor(const HtfTensor& tensor, double pitch_um);

}  // namespace holo
