#include "affseg/malis.hpp"

#include <algorithm>
#include <unordered_map>

#include "affseg/error.hpp"
#include "affseg/union_find.hpp"

namespace affseg {

std::vector<std::uint64_t> maximin_edge_order(const AffinityVolume& aff) {
  std::vector<std::uint64_t> order;
  order.reserve(kChannels * aff.voxels());
  for_each_edge(aff.shape(), [&](int c, std::uint64_t v, std::uint64_t) { order.push_back(c * aff.voxels() + v); });
  const std::span<const float> a = aff.data();
  std::sort(order.begin(), order.end(), [&](std::uint64_t l, std::uint64_t r) {
    if (a[l] != a[r]) return a[l] > a[r];
    return l < r;
  });
  return order;
}

float maximin_affinity(const AffinityVolume& aff, const Voxel& a, const Voxel& b) {
  const Shape3& s = aff.shape();
  if (!in_bounds(s, a) || !in_bounds(s, b)) throw Error(Errc::OutOfBounds, "maximin endpoint outside volume");
  if (a == b) throw Error(Errc::InvalidArgument, "maximin endpoints must differ");

  const std::uint64_t n = aff.voxels();
  const std::uint64_t va = flat_index(s, a);
  const std::uint64_t vb = flat_index(s, b);
  UnionFind uf(n);
  for (const std::uint64_t slot : maximin_edge_order(aff)) {
    const int c = static_cast<int>(slot / n);
    const std::uint64_t v = slot % n;
    uf.unite(v, v + channel_stride(s, c));
    if (uf.find(va) == uf.find(vb)) return aff.data()[slot];
  }
  // Unreachable: the in-bounds grid is connected.
  return 0.0f;
}

PairCounts malis_edge_counts(const AffinityVolume& aff, const LabelVolume& gt) {
  require_same_shape(aff.shape(), gt.shape(), "malis_edge_counts");
  const Shape3& s = aff.shape();
  const std::uint64_t n = aff.voxels();

  PairCounts counts{EdgeArray<std::uint64_t>(s), EdgeArray<std::uint64_t>(s)};
  UnionFind uf(n);
  // Label histogram and labeled-voxel total of each component, indexed by root.
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> hist(n);
  std::vector<std::uint64_t> labeled(n, 0);
  for (std::uint64_t v = 0; v < n; ++v) {
    if (gt[v] != 0) {
      hist[v].emplace(gt[v], 1);
      labeled[v] = 1;
    }
  }

  for (const std::uint64_t slot : maximin_edge_order(aff)) {
    const int c = static_cast<int>(slot / n);
    const std::uint64_t v = slot % n;
    std::uint64_t ra = uf.find(v);
    std::uint64_t rb = uf.find(v + channel_stride(s, c));
    if (ra == rb) continue;

    if (hist[ra].size() < hist[rb].size()) std::swap(ra, rb);
    std::uint64_t same = 0;
    for (const auto& [label, count] : hist[rb]) {
      if (auto it = hist[ra].find(label); it != hist[ra].end()) same += it->second * count;
    }
    counts.pos.values[slot] = same;
    counts.neg.values[slot] = labeled[ra] * labeled[rb] - same;

    for (const auto& [label, count] : hist[rb]) hist[ra][label] += count;
    labeled[ra] += labeled[rb];
    hist[rb] = {};
    labeled[rb] = 0;
    uf.attach(ra, rb);
  }
  return counts;
}

MalisResult malis_gradient(const AffinityVolume& aff, const PairCounts& counts, bool normalize) {
  require_same_shape(aff.shape(), counts.pos.shape, "malis_gradient");
  require_same_shape(aff.shape(), counts.neg.shape, "malis_gradient");
  MalisResult result{0.0, EdgeArray<float>(aff.shape())};
  std::uint64_t pairs = 0;
  std::vector<double> grad(result.gradient.values.size(), 0.0);
  const std::span<const float> a = aff.data();
  for (std::size_t e = 0; e < a.size(); ++e) {
    const std::uint64_t pos = counts.pos.values[e];
    const std::uint64_t neg = counts.neg.values[e];
    if (pos == 0 && neg == 0) continue;
    const double ae = a[e];
    result.loss += static_cast<double>(pos) * (ae - 1.0) * (ae - 1.0) + static_cast<double>(neg) * ae * ae;
    grad[e] = 2.0 * static_cast<double>(pos) * (ae - 1.0) + 2.0 * static_cast<double>(neg) * ae;
    pairs += pos + neg;
  }
  const double scale = normalize ? (pairs == 0 ? 0.0 : 1.0 / static_cast<double>(pairs)) : 1.0;
  result.loss *= scale;
  for (std::size_t e = 0; e < grad.size(); ++e) result.gradient.values[e] = static_cast<float>(grad[e] * scale);
  return result;
}

MalisResult malis_gradient(const AffinityVolume& aff, const LabelVolume& gt, bool normalize) {
  return malis_gradient(aff, malis_edge_counts(aff, gt), normalize);
}

}  // namespace affseg
