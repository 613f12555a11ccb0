#pragma once

#include <cstdint>
#include <vector>

#include "affseg/volume.hpp"

namespace affseg {

struct WatershedParams {
  float t_high = 0.98f;
  float t_low = 0.2f;
  std::uint64_t size_min = 25;
  float t_merge = 0.3f;
};

/// Throws InvalidArgument unless 0 <= t_low <= t_merge <= t_high <= 1.
void validate(const WatershedParams& p);

struct BasinStats {
  /// sizes[k] is the voxel count of label k; sizes[0] is the background count.
  std::vector<std::uint64_t> sizes;

  std::uint64_t background() const noexcept { return sizes.empty() ? 0 : sizes[0]; }
  std::uint64_t segments() const noexcept { return sizes.empty() ? 0 : sizes.size() - 1; }
};

struct WatershedResult {
  LabelVolume labels;
  BasinStats stats;
};

/// Affinity-graph watershed:
///  1. union every edge with affinity >= t_high;
///  2. each voxel not touched by step 1 follows its highest-affinity incident
///     edge (ties: channel ascending, then the lower neighbour) when that
///     affinity is >= t_low;
///  3. voxels with no incident edge >= t_low become background;
///  4. segments smaller than size_min merge across their best boundary edge
///     when it is >= t_merge (see size_filter);
///  5. labels are renumbered 1..K by first voxel.
WatershedResult zwatershed(const AffinityVolume& aff, const WatershedParams& p);

/// Steps 4-5 applied to an existing labeling. Region-graph edges carry the
/// maximum crossing affinity and are swept in decreasing order (ties: smaller
/// label pair first); an edge merges its two segments when either is still
/// below size_min and the affinity is >= t_merge. Segments still below
/// size_min afterwards become background.
LabelVolume size_filter(const LabelVolume& labels, const AffinityVolume& aff, std::uint64_t size_min, float t_merge);

BasinStats basin_stats(const LabelVolume& dense_labels);

}  // namespace affseg
