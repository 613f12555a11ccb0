#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "affseg/volume.hpp"
#include "affseg/zwatershed.hpp"

namespace affseg {

/// One block of a partition: `core` tiles the volume, `halo` is the core
/// grown by the halo width and clipped to the volume.
struct BlockSpec {
  std::uint64_t id = 0;
  Box core;
  Box halo;

  bool operator==(const BlockSpec&) const = default;
};

/// Regular grid of cores (the last block on each axis is truncated), z-major
/// block order. Throws InvalidPartition when an axis with more than one
/// block has a zero halo, or a block dimension is zero.
std::vector<BlockSpec> partition_blocks(const Shape3& shape, const Shape3& block, const Shape3& halo);

struct StitchParams {
  double min_ratio = 0.5;
  std::uint64_t min_voxels = 2;
};

void validate(const StitchParams& p);

struct StitchNode {
  std::uint64_t block = 0;
  std::uint64_t label = 0;
  auto operator<=>(const StitchNode&) const = default;
};

/// Overlap of two block-local segments over the voxels both halos cover.
/// count_a / count_b are each segment's voxel count inside that shared region.
struct StitchEdge {
  StitchNode a;
  StitchNode b;
  std::uint64_t overlap = 0;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
};

/// Edges sorted by (a, b).
std::vector<StitchEdge> stitch_graph(const std::vector<BlockSpec>& specs, const std::vector<LabelVolume>& labelings);

/// Joins block-local segments whose overlap is >= min_voxels and
/// >= min_ratio * min(count_a, count_b), then writes each block's core with
/// global ids numbered 1..K by first voxel. A default-constructed (empty)
/// labeling counts as missing and raises CoverageGap.
LabelVolume stitch(const std::vector<BlockSpec>& specs, const std::vector<LabelVolume>& labelings,
                   const StitchParams& params);

/// Runs zwatershed on every block's halo crop, in parallel over blocks.
std::vector<LabelVolume> segment_blocks(const AffinityVolume& aff, const std::vector<BlockSpec>& specs,
                                        const WatershedParams& params);

/// Text manifest:
///   shape Z Y X
///   block ID core Z0 Z1 Y0 Y1 X0 X1 halo Z0 Z1 Y0 Y1 X0 X1 labels PATH
/// Lines starting with '#' are comments. Relative paths are resolved against
/// the manifest's directory by read_manifest.
struct Manifest {
  Shape3 shape{};
  std::vector<BlockSpec> blocks;
  std::vector<std::string> label_paths;
};

std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(const std::string& text);
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace affseg
