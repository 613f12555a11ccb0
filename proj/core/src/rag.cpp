#include "affseg/rag.hpp"

#include <algorithm>
#include <string>

#include "affseg/error.hpp"
#include "affseg/parallel.hpp"

namespace affseg {
namespace {

constexpr std::uint64_t kSectionsPerChunk = 4;

struct PartialRag {
  std::unordered_map<std::uint64_t, RagNode> nodes;
  std::unordered_map<EdgeKey, FeatureAccumulator, EdgeKeyHash> edges;
};

}  // namespace

const RagNode& Rag::node(std::uint64_t label) const {
  auto it = nodes_.find(label);
  if (it == nodes_.end()) throw Error(Errc::InvalidArgument, "no RAG node " + std::to_string(label));
  return it->second;
}

const FeatureAccumulator& Rag::edge(std::uint64_t u, std::uint64_t v) const {
  auto it = edges_.find(EdgeKey::of(u, v));
  if (it == edges_.end()) {
    throw Error(Errc::MissingEdge, "no RAG edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
  }
  return it->second;
}

std::vector<std::uint64_t> Rag::labels() const {
  std::vector<std::uint64_t> out;
  out.reserve(nodes_.size());
  for (const auto& [label, node] : nodes_) out.push_back(label);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EdgeKey> Rag::edge_keys() const {
  std::vector<EdgeKey> out;
  out.reserve(edges_.size());
  for (const auto& [key, acc] : edges_) out.push_back(key);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> Rag::neighbours(std::uint64_t label) const {
  std::vector<std::uint64_t> out;
  if (auto it = adjacency_.find(label); it != adjacency_.end()) out.assign(it->second.begin(), it->second.end());
  std::sort(out.begin(), out.end());
  return out;
}

void Rag::add_node(std::uint64_t label, const RagNode& node) {
  auto [it, inserted] = nodes_.try_emplace(label, node);
  if (!inserted) {
    it->second.size += node.size;
    it->second.internal.merge(node.internal);
  }
}

void Rag::add_edge(EdgeKey key, const FeatureAccumulator& acc) {
  auto [it, inserted] = edges_.try_emplace(key, acc);
  if (!inserted) {
    it->second.merge(acc);
    return;
  }
  adjacency_[key.a].insert(key.b);
  adjacency_[key.b].insert(key.a);
}

void Rag::merge(std::uint64_t survivor, std::uint64_t absorbed) {
  if (survivor == absorbed || !has_node(survivor) || !has_node(absorbed)) {
    throw Error(Errc::InvalidArgument, "cannot merge " + std::to_string(absorbed) + " into " + std::to_string(survivor));
  }
  RagNode& keep = nodes_.at(survivor);
  const RagNode gone = nodes_.at(absorbed);
  keep.size += gone.size;
  keep.internal.merge(gone.internal);

  if (auto shared = edges_.find(EdgeKey::of(survivor, absorbed)); shared != edges_.end()) {
    keep.internal.merge(shared->second);
    edges_.erase(shared);
    adjacency_[survivor].erase(absorbed);
    adjacency_[absorbed].erase(survivor);
  }

  const auto moved = std::move(adjacency_[absorbed]);
  adjacency_.erase(absorbed);
  for (const std::uint64_t other : moved) {
    auto old = edges_.find(EdgeKey::of(absorbed, other));
    const FeatureAccumulator acc = old->second;
    edges_.erase(old);
    adjacency_[other].erase(absorbed);
    add_edge(EdgeKey::of(survivor, other), acc);
  }
  nodes_.erase(absorbed);
}

Rag build_rag(const LabelVolume& labels, const AffinityVolume& aff) {
  require_same_shape(labels.shape(), aff.shape(), "build_rag");
  const Shape3& s = labels.shape();
  const std::uint64_t chunks = (s.z + kSectionsPerChunk - 1) / kSectionsPerChunk;
  std::vector<PartialRag> parts(chunks);

  parallel_for(chunks, [&](std::size_t chunk) {
    PartialRag& part = parts[chunk];
    const std::uint64_t z0 = chunk * kSectionsPerChunk;
    const std::uint64_t z1 = std::min(s.z, z0 + kSectionsPerChunk);
    for (std::uint64_t z = z0; z < z1; ++z) {
      for (std::uint64_t y = 0; y < s.y; ++y) {
        for (std::uint64_t x = 0; x < s.x; ++x) {
          const std::uint64_t v = flat_index(s, z, y, x);
          const std::uint64_t lv = labels[v];
          if (lv != 0) ++part.nodes[lv].size;
          const Voxel p{z, y, x};
          for (int c = 0; c < kChannels; ++c) {
            if (!has_edge(s, c, p)) continue;
            const std::uint64_t lu = labels[v + channel_stride(s, c)];
            if (lv == 0 || lu == 0) continue;
            const float a = aff.get(c, v);
            if (lv == lu) {
              part.nodes[lv].internal.add(c, a);
            } else {
              part.edges[EdgeKey::of(lv, lu)].add(c, a);
            }
          }
        }
      }
    }
  });

  Rag rag;
  for (const PartialRag& part : parts) {
    for (const auto& [label, node] : part.nodes) rag.add_node(label, node);
    for (const auto& [key, acc] : part.edges) rag.add_edge(key, acc);
  }
  return rag;
}

FeatureVector edge_features(const Rag& rag, std::uint64_t u, std::uint64_t v) {
  const FeatureAccumulator& acc = rag.edge(u, v);
  return edge_features(acc, rag.node(u).size, rag.node(v).size);
}

}  // namespace affseg
