#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "affseg/volume.hpp"

namespace affseg {

/// VOLB container, little-endian throughout:
///   bytes 0-3   magic "VOLB"
///   bytes 4-7   version (u32) = 1
///   byte  8     dtype (1 = u64 labels, 2 = f32 affinities)
///   byte  9     channel count (1 for labels, 3 for affinities)
///   bytes 10-15 reserved, zero
///   bytes 16-39 dims z, y, x (u64 each)
///   payload     channel-slowest, x-fastest
enum class Dtype : std::uint8_t { U64Labels = 1, F32Affinities = 2 };

inline constexpr std::size_t kVolumeHeaderBytes = 40;
inline constexpr std::uint32_t kVolumeFormatVersion = 1;

using AnyVolume = std::variant<LabelVolume, AffinityVolume>;

std::vector<std::byte> encode_volume(const LabelVolume& vol);
std::vector<std::byte> encode_volume(const AffinityVolume& vol);
/// Gradients and other unconstrained per-edge floats use the affinity dtype.
std::vector<std::byte> encode_volume(const EdgeArray<float>& field);

AnyVolume decode_volume(std::span<const std::byte> bytes);
EdgeArray<float> decode_edge_field(std::span<const std::byte> bytes);

AnyVolume read_volume(const std::filesystem::path& path);
LabelVolume read_labels(const std::filesystem::path& path);
AffinityVolume read_affinities(const std::filesystem::path& path);
EdgeArray<float> read_edge_field(const std::filesystem::path& path);

void write_volume(const LabelVolume& vol, const std::filesystem::path& path);
void write_volume(const AffinityVolume& vol, const std::filesystem::path& path);
void write_volume(const EdgeArray<float>& field, const std::filesystem::path& path);

/// Raw file helpers shared with the other on-disk formats.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace affseg
