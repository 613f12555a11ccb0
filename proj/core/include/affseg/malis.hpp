#pragma once

#include <cstdint>
#include <vector>

#include "affseg/volume.hpp"

namespace affseg {

/// Per-edge MALIS pair counts, laid out like an AffinityVolume.
struct PairCounts {
  EdgeArray<std::uint64_t> pos;
  EdgeArray<std::uint64_t> neg;
};

struct MalisResult {
  double loss = 0.0;
  EdgeArray<float> gradient;
};

/// In-bounds edge slots (channel * voxels + voxel) in sweep order: affinity
/// descending, then slot ascending, i.e. channel, z, y, x ascending.
std::vector<std::uint64_t> maximin_edge_order(const AffinityVolume& aff);

/// Max over all paths a -> b of the smallest affinity on the path. Every
/// in-bounds edge participates, so the grid is always connected.
float maximin_affinity(const AffinityVolume& aff, const Voxel& a, const Voxel& b);

/// Attributes every pair of labeled voxels to its maximin edge: +1 pos when
/// the labels agree, +1 neg when they differ. Label-0 voxels carry paths but
/// are never counted.
PairCounts malis_edge_counts(const AffinityVolume& aff, const LabelVolume& gt);

/// Quadratic per-pair loss: sum_e pos(e)(a_e - 1)^2 + neg(e) a_e^2, and its
/// gradient with respect to each affinity. With `normalize`, both are divided
/// by the total pair count (zero when there are no pairs).
MalisResult malis_gradient(const AffinityVolume& aff, const LabelVolume& gt, bool normalize);
MalisResult malis_gradient(const AffinityVolume& aff, const PairCounts& counts, bool normalize);

}  // namespace affseg
