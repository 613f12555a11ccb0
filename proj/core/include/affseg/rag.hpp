#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "affseg/features.hpp"
#include "affseg/volume.hpp"

namespace affseg {

/// Unordered label pair, stored with a < b.
struct EdgeKey {
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  static EdgeKey of(std::uint64_t u, std::uint64_t v) noexcept { return u < v ? EdgeKey{u, v} : EdgeKey{v, u}; }
  auto operator<=>(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const noexcept {
    std::uint64_t h = k.a * 0x9E3779B97F4A7C15ULL;
    h ^= k.b + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

struct RagNode {
  std::uint64_t size = 0;
  /// Affinities of edges with both ends inside the segment.
  FeatureAccumulator internal;
};

/// Region adjacency graph over nonzero labels. An edge exists iff at least
/// one in-bounds affinity edge joins voxels of the two segments.
class Rag {
 public:
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  bool has_node(std::uint64_t label) const noexcept { return nodes_.contains(label); }
  bool has_edge(std::uint64_t u, std::uint64_t v) const noexcept { return edges_.contains(EdgeKey::of(u, v)); }

  /// Throws InvalidArgument for an unknown label.
  const RagNode& node(std::uint64_t label) const;
  /// Throws MissingEdge.
  const FeatureAccumulator& edge(std::uint64_t u, std::uint64_t v) const;

  /// Sorted ascending.
  std::vector<std::uint64_t> labels() const;
  std::vector<EdgeKey> edge_keys() const;
  std::vector<std::uint64_t> neighbours(std::uint64_t label) const;

  /// Folds `absorbed` into `survivor`: sizes add, interiors combine with the
  /// shared boundary, and boundaries to common neighbours are merged.
  void merge(std::uint64_t survivor, std::uint64_t absorbed);

  void add_node(std::uint64_t label, const RagNode& node);
  void add_edge(EdgeKey key, const FeatureAccumulator& acc);

 private:
  std::unordered_map<std::uint64_t, RagNode> nodes_;
  std::unordered_map<EdgeKey, FeatureAccumulator, EdgeKeyHash> edges_;
  std::unordered_map<std::uint64_t, std::unordered_set<std::uint64_t>> adjacency_;
};

/// Label 0 is excluded from nodes and edges. Accumulation runs over fixed
/// groups of z-sections that are combined in order, so the result does not
/// depend on the thread count.
Rag build_rag(const LabelVolume& labels, const AffinityVolume& aff);

/// Feature vector of an existing RAG edge; throws MissingEdge.
FeatureVector edge_features(const Rag& rag, std::uint64_t u, std::uint64_t v);

}  // namespace affseg
