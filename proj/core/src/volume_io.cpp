#include "affseg/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "affseg/error.hpp"

namespace affseg {
namespace {

constexpr std::byte kMagic[4] = {std::byte{'V'}, std::byte{'O'}, std::byte{'L'}, std::byte{'B'}};

template <class UInt>
void put_le(std::vector<std::byte>& out, UInt value) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xFF));
  }
}

template <class UInt>
UInt get_le(std::span<const std::byte> bytes, std::size_t offset) {
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

std::vector<std::byte> header(Dtype dtype, std::uint8_t channels, const Shape3& shape, std::size_t payload_bytes) {
  std::vector<std::byte> out;
  out.reserve(kVolumeHeaderBytes + payload_bytes);
  for (const std::byte b : kMagic) out.push_back(b);
  put_le<std::uint32_t>(out, kVolumeFormatVersion);
  out.push_back(static_cast<std::byte>(dtype));
  out.push_back(static_cast<std::byte>(channels));
  for (int i = 0; i < 6; ++i) out.push_back(std::byte{0});
  put_le<std::uint64_t>(out, shape.z);
  put_le<std::uint64_t>(out, shape.y);
  put_le<std::uint64_t>(out, shape.x);
  return out;
}

std::vector<std::byte> encode_floats(const Shape3& shape, std::span<const float> values) {
  auto out = header(Dtype::F32Affinities, kChannels, shape, values.size() * 4);
  for (const float v : values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

struct Header {
  Dtype dtype;
  std::uint8_t channels;
  Shape3 shape;
};

Header parse_header(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(Errc::BadMagic, "not a VOLB volume file");
  }
  if (bytes.size() < kVolumeHeaderBytes) {
    throw Error(Errc::TruncatedPayload, "header shorter than 40 bytes");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kVolumeFormatVersion) {
    throw Error(Errc::BadHeader, "unsupported version " + std::to_string(version));
  }
  const auto dtype_code = std::to_integer<std::uint8_t>(bytes[8]);
  const auto channels = std::to_integer<std::uint8_t>(bytes[9]);
  Header h{};
  if (dtype_code == static_cast<std::uint8_t>(Dtype::U64Labels)) {
    h.dtype = Dtype::U64Labels;
    if (channels != 1) throw Error(Errc::BadHeader, "label volume must have 1 channel");
  } else if (dtype_code == static_cast<std::uint8_t>(Dtype::F32Affinities)) {
    h.dtype = Dtype::F32Affinities;
    if (channels != kChannels) throw Error(Errc::BadHeader, "affinity volume must have 3 channels");
  } else {
    throw Error(Errc::UnknownDtype, "dtype code " + std::to_string(dtype_code));
  }
  h.channels = channels;
  h.shape = {get_le<std::uint64_t>(bytes, 16), get_le<std::uint64_t>(bytes, 24), get_le<std::uint64_t>(bytes, 32)};
  try {
    validate_shape(h.shape);
  } catch (const Error& e) {
    throw Error(Errc::BadHeader, e.what());
  }
  const std::uint64_t elem = h.dtype == Dtype::U64Labels ? 8 : 4;
  const std::uint64_t entries = h.channels * h.shape.voxels();
  const std::uint64_t payload = bytes.size() - kVolumeHeaderBytes;
  if (entries > payload / elem + 1 || payload != entries * elem) {
    throw Error(Errc::TruncatedPayload, "payload of " + std::to_string(payload) + " bytes, expected " +
                                            std::to_string(entries) + " entries of " + std::to_string(elem) +
                                            " bytes");
  }
  return h;
}

std::vector<float> payload_floats(std::span<const std::byte> bytes, const Header& h) {
  std::vector<float> data(h.channels * h.shape.voxels());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, kVolumeHeaderBytes + 4 * i));
  }
  return data;
}

}  // namespace

std::vector<std::byte> encode_volume(const LabelVolume& vol) {
  auto out = header(Dtype::U64Labels, 1, vol.shape(), vol.size() * 8);
  for (const auto id : vol.data()) put_le<std::uint64_t>(out, id);
  return out;
}

std::vector<std::byte> encode_volume(const AffinityVolume& vol) { return encode_floats(vol.shape(), vol.data()); }

std::vector<std::byte> encode_volume(const EdgeArray<float>& field) { return encode_floats(field.shape, field.values); }

AnyVolume decode_volume(std::span<const std::byte> bytes) {
  const Header h = parse_header(bytes);
  if (h.dtype == Dtype::U64Labels) {
    std::vector<std::uint64_t> data(h.shape.voxels());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = get_le<std::uint64_t>(bytes, kVolumeHeaderBytes + 8 * i);
    return LabelVolume(h.shape, std::move(data));
  }
  return AffinityVolume(h.shape, payload_floats(bytes, h));
}

EdgeArray<float> decode_edge_field(std::span<const std::byte> bytes) {
  const Header h = parse_header(bytes);
  if (h.dtype != Dtype::F32Affinities) throw Error(Errc::UnknownDtype, "expected an f32 per-edge volume");
  EdgeArray<float> field;
  field.shape = h.shape;
  field.values = payload_floats(bytes, h);
  return field;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::byte> bytes(size);
  in.seekg(0);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw Error(Errc::IoFailure, "cannot read " + path.string());
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

AnyVolume read_volume(const std::filesystem::path& path) { return decode_volume(read_file_bytes(path)); }

LabelVolume read_labels(const std::filesystem::path& path) {
  auto vol = read_volume(path);
  if (auto* labels = std::get_if<LabelVolume>(&vol)) return std::move(*labels);
  throw Error(Errc::UnknownDtype, path.string() + " holds affinities, expected labels");
}

AffinityVolume read_affinities(const std::filesystem::path& path) {
  auto vol = read_volume(path);
  if (auto* aff = std::get_if<AffinityVolume>(&vol)) return std::move(*aff);
  throw Error(Errc::UnknownDtype, path.string() + " holds labels, expected affinities");
}

EdgeArray<float> read_edge_field(const std::filesystem::path& path) { return decode_edge_field(read_file_bytes(path)); }

void write_volume(const LabelVolume& vol, const std::filesystem::path& path) { write_file_bytes(path, encode_volume(vol)); }

void write_volume(const AffinityVolume& vol, const std::filesystem::path& path) {
  write_file_bytes(path, encode_volume(vol));
}

void write_volume(const EdgeArray<float>& field, const std::filesystem::path& path) {
  write_file_bytes(path, encode_volume(field));
}

}  // namespace affseg
