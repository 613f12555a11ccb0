#include "affseg/zwatershed.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

#include "affseg/error.hpp"
#include "affseg/parallel.hpp"
#include "affseg/union_find.hpp"

namespace affseg {
namespace {

constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();

// Highest-affinity incident edge of v, scanning channels ascending and the
// lower neighbour before the upper one; only a strictly larger value wins.
std::uint64_t best_neighbour(const AffinityVolume& aff, std::uint64_t v, const Voxel& p, float* best_value) {
  const Shape3& s = aff.shape();
  std::uint64_t best = kNone;
  float value = -1.0f;
  for (int c = 0; c < kChannels; ++c) {
    const std::uint64_t stride = channel_stride(s, c);
    if (p[c] > 0) {
      const float a = aff.get(c, v - stride);
      if (a > value) {
        value = a;
        best = v - stride;
      }
    }
    if (p[c] + 1 < s[c]) {
      const float a = aff.get(c, v);
      if (a > value) {
        value = a;
        best = v + stride;
      }
    }
  }
  *best_value = value;
  return best;
}

}  // namespace

void validate(const WatershedParams& p) {
  const bool ok = p.t_low >= 0.0f && p.t_low <= p.t_merge && p.t_merge <= p.t_high && p.t_high <= 1.0f;
  if (!ok) {
    throw Error(Errc::InvalidArgument, "watershed thresholds must satisfy 0 <= t_low <= t_merge <= t_high <= 1 (got " +
                                           std::to_string(p.t_low) + ", " + std::to_string(p.t_merge) + ", " +
                                           std::to_string(p.t_high) + ")");
  }
}

BasinStats basin_stats(const LabelVolume& dense_labels) {
  BasinStats stats;
  stats.sizes.assign(1, 0);
  for (const auto id : dense_labels.data()) {
    if (id >= stats.sizes.size()) stats.sizes.resize(id + 1, 0);
    ++stats.sizes[id];
  }
  return stats;
}

LabelVolume size_filter(const LabelVolume& labels, const AffinityVolume& aff, std::uint64_t size_min, float t_merge) {
  require_same_shape(labels.shape(), aff.shape(), "size_filter");
  if (size_min == 0) return labels;

  // Compact ids in ascending label order so ties can be broken by label.
  std::vector<std::uint64_t> ids(labels.data().begin(), labels.data().end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (!ids.empty() && ids.front() == 0) ids.erase(ids.begin());
  std::unordered_map<std::uint64_t, std::uint64_t> index;
  index.reserve(ids.size());
  for (std::uint64_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  std::vector<std::uint64_t> compact(labels.size(), kNone);
  std::vector<std::uint64_t> sizes(ids.size(), 0);
  for (std::uint64_t v = 0; v < labels.size(); ++v) {
    if (labels[v] == 0) continue;
    compact[v] = index.at(labels[v]);
    ++sizes[compact[v]];
  }

  struct RegionEdge {
    std::uint64_t a;
    std::uint64_t b;
    float affinity;
  };
  std::unordered_map<std::uint64_t, std::size_t> slot;  // key a * K + b
  std::vector<RegionEdge> edges;
  const std::uint64_t k = ids.size();
  for_each_edge(labels.shape(), [&](int c, std::uint64_t v, std::uint64_t u) {
    std::uint64_t a = compact[v];
    std::uint64_t b = compact[u];
    if (a == kNone || b == kNone || a == b) return;
    if (a > b) std::swap(a, b);
    const float w = aff.get(c, v);
    auto [it, inserted] = slot.try_emplace(a * k + b, edges.size());
    if (inserted) {
      edges.push_back({a, b, w});
    } else if (w > edges[it->second].affinity) {
      edges[it->second].affinity = w;
    }
  });
  std::sort(edges.begin(), edges.end(), [](const RegionEdge& l, const RegionEdge& r) {
    if (l.affinity != r.affinity) return l.affinity > r.affinity;
    if (l.a != r.a) return l.a < r.a;
    return l.b < r.b;
  });

  UnionFind uf(k);
  for (const auto& e : edges) {
    if (e.affinity < t_merge) break;
    const std::uint64_t ra = uf.find(e.a);
    const std::uint64_t rb = uf.find(e.b);
    if (ra == rb) continue;
    if (sizes[ra] >= size_min && sizes[rb] >= size_min) continue;
    const std::uint64_t merged = sizes[ra] + sizes[rb];
    const std::uint64_t root = uf.unite(ra, rb);
    sizes[root] = merged;
  }

  LabelVolume out(labels.shape());
  for (std::uint64_t v = 0; v < labels.size(); ++v) {
    if (compact[v] == kNone) continue;
    const std::uint64_t root = uf.find(compact[v]);
    out[v] = sizes[root] < size_min ? 0 : root + 1;
  }
  return relabel_dense(out);
}

WatershedResult zwatershed(const AffinityVolume& aff, const WatershedParams& p) {
  validate(p);
  const Shape3& s = aff.shape();
  const std::uint64_t n = aff.voxels();

  UnionFind uf(n);
  std::vector<std::uint8_t> touched(n, 0);
  for_each_edge(s, [&](int c, std::uint64_t v, std::uint64_t u) {
    if (aff.get(c, v) >= p.t_high) {
      uf.unite(v, u);
      touched[v] = 1;
      touched[u] = 1;
    }
  });

  // Steepest-ascent targets are independent per voxel; compute them per
  // z-section and apply the unions sequentially.
  std::vector<std::uint64_t> target(n, kNone);
  std::vector<std::uint8_t> background(n, 0);
  const std::uint64_t section = s.y * s.x;
  parallel_for(s.z, [&](std::size_t z) {
    for (std::uint64_t v = z * section; v < (z + 1) * section; ++v) {
      if (touched[v]) continue;
      float value = 0.0f;
      const std::uint64_t best = best_neighbour(aff, v, unflatten(s, v), &value);
      if (best != kNone && value >= p.t_low) {
        target[v] = best;
      } else {
        background[v] = 1;
      }
    }
  });
  for (std::uint64_t v = 0; v < n; ++v) {
    if (target[v] != kNone) uf.unite(v, target[v]);
  }

  LabelVolume labels(s);
  for (std::uint64_t v = 0; v < n; ++v) labels[v] = background[v] ? 0 : uf.find(v) + 1;
  labels = relabel_dense(labels);
  labels = relabel_dense(size_filter(labels, aff, p.size_min, p.t_merge));

  WatershedResult result{std::move(labels), {}};
  result.stats = basin_stats(result.labels);
  return result;
}

}  // namespace affseg
