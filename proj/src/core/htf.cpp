#include "holo/core/htf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "holo/core/error.hpp"
#include "holo/core/io.hpp"

namespace holo {

namespace {

constexpr std::uint8_t kMagic[4] = {'H', 'O', 'L', 'O'};
constexpr std::uint8_t kVersion = 1;

std::size_t scalar_bytes(DType dtype) {
  switch (dtype) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::Complex64: return 8;
    case DType::U8: return 1;
    case DType::U16: return 2;
  }
  throw FormatError(FormatError::Kind::UnsupportedDtype, "unknown dtype");
}

std::size_t values_per_element(DType dtype) { return dtype == DType::Complex64 ? 2 : 1; }

bool known_dtype(std::uint8_t tag) { return tag >= 1 && tag <= 5; }

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int nbytes) {
  for (int i = 0; i < nbytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(const std::uint8_t* p, int nbytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < nbytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void check_value(DType dtype, double v) {
  if (!std::isfinite(v)) throw InvalidArgument("HTF: refusing to write non-finite value");
  if (dtype == DType::U8 || dtype == DType::U16) {
    const double hi = dtype == DType::U8 ? 255.0 : 65535.0;
    if (v < 0 || v > hi || v != std::floor(v))
      throw InvalidArgument("HTF: integer tensor value out of range");
  }
  if (dtype == DType::F32 || dtype == DType::Complex64) {
    if (!std::isfinite(static_cast<float>(v)))
      throw InvalidArgument("HTF: value overflows f32");
  }
}

}  // namespace

std::size_t HtfTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const HtfTensor& t) {
  if (t.dims.size() > 255) throw InvalidArgument("HTF: too many dimensions");
  const std::size_t per = values_per_element(t.dtype);
  if (t.values.size() != t.element_count() * per)
    throw InvalidArgument("HTF: value count does not match dims");

  std::vector<std::uint8_t> out;
  out.reserve(7 + 4 * t.dims.size() + t.values.size() * scalar_bytes(t.dtype) / per);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(t.dtype));
  out.push_back(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) put_le(out, d, 4);

  for (double v : t.values) {
    check_value(t.dtype, v);
    switch (t.dtype) {
      case DType::F32:
      case DType::Complex64:
        put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
        break;
      case DType::F64: put_le(out, std::bit_cast<std::uint64_t>(v), 8); break;
      case DType::U8: put_le(out, static_cast<std::uint64_t>(v), 1); break;
      case DType::U16: put_le(out, static_cast<std::uint64_t>(v), 2); break;
    }
  }
  return out;
}

HtfTensor decode_tensor(std::span<const std::uint8_t> bytes) {
  using Kind = FormatError::Kind;
  if (bytes.size() < 4) throw FormatError(Kind::Truncated, "HTF: file shorter than magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(Kind::BadMagic, "HTF: bad magic");
  if (bytes.size() < 7) throw FormatError(Kind::Truncated, "HTF: truncated header");
  if (bytes[4] != kVersion)
    throw FormatError(Kind::UnsupportedVersion,
                      "HTF: unsupported version " + std::to_string(bytes[4]));
  if (!known_dtype(bytes[5]))
    throw FormatError(Kind::UnsupportedDtype, "HTF: unsupported dtype " + std::to_string(bytes[5]));

  HtfTensor t;
  t.dtype = static_cast<DType>(bytes[5]);
  const std::size_t ndim = bytes[6];
  std::size_t pos = 7;
  if (bytes.size() < pos + 4 * ndim) throw FormatError(Kind::Truncated, "HTF: truncated dims");
  for (std::size_t i = 0; i < ndim; ++i, pos += 4)
    t.dims.push_back(static_cast<std::uint32_t>(get_le(bytes.data() + pos, 4)));

  const std::size_t per = values_per_element(t.dtype);
  const std::size_t width = scalar_bytes(t.dtype) / per;
  const std::size_t count = t.element_count() * per;
  if (bytes.size() - pos < count * width) throw FormatError(Kind::Truncated, "HTF: truncated payload");
  if (bytes.size() - pos > count * width)
    throw FormatError(Kind::Malformed, "HTF: trailing bytes after payload");

  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i, pos += width) {
    const std::uint64_t raw = get_le(bytes.data() + pos, static_cast<int>(width));
    switch (t.dtype) {
      case DType::F32:
      case DType::Complex64:
        t.values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(raw));
        break;
      case DType::F64: t.values[i] = std::bit_cast<double>(raw); break;
      case DType::U8:
      case DType::U16: t.values[i] = static_cast<double>(raw); break;
    }
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const HtfTensor& tensor) {
  const auto bytes = encode_tensor(tensor);
  write_file_atomic(path, bytes);
}

HtfTensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

HtfTensor to_tensor(const RealImage& image, DType dtype) {
  if (dtype == DType::Complex64) throw InvalidArgument("to_tensor: real image cannot be complex64");
  HtfTensor t;
  t.dtype = dtype;
  t.dims = {static_cast<std::uint32_t>(image.height()), static_cast<std::uint32_t>(image.width())};
  t.values.assign(image.data().begin(), image.data().end());
  if (dtype == DType::F32)
    for (double& v : t.values) v = static_cast<float>(v);
  return t;
}

HtfTensor to_tensor(const ComplexField& field) {
  HtfTensor t;
  t.dtype = DType::Complex64;
  t.dims = {static_cast<std::uint32_t>(field.height()), static_cast<std::uint32_t>(field.width())};
  t.values.resize(2 * field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    t.values[2 * i] = static_cast<float>(field.re()[i]);
    t.values[2 * i + 1] = static_cast<float>(field.im()[i]);
  }
  return t;
}

RealImage image_from_tensor(const HtfTensor& t) {
  if (t.dims.size() != 2 || t.dtype == DType::Complex64)
    throw InvalidArgument("image_from_tensor: expected a rank-2 real tensor");
  return RealImage(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), t.values);
}

ComplexField field_from_tensor(const HtfTensor& t, double pitch_um) {
  if (t.dims.size() != 2 || t.dtype != DType::Complex64)
    throw InvalidArgument("field_from_tensor: expected a rank-2 complex64 tensor");
  ComplexField f(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]), pitch_um);
  for (std::size_t i = 0; i < f.size(); ++i) f.set(i, {t.values[2 * i], t.values[2 * i + 1]});
  return f;
}

}  // namespace holo
