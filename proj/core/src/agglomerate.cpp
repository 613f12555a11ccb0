#include "affseg/agglo.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <unordered_map>

#include "affseg/error.hpp"

namespace affseg {
namespace {

struct QueueEntry {
  double score;
  EdgeKey key;
  std::uint64_t version_a;
  std::uint64_t version_b;
};

// Max-heap order: higher score first, then the smaller label pair.
struct LowerPriority {
  bool operator()(const QueueEntry& l, const QueueEntry& r) const noexcept {
    if (l.score != r.score) return l.score < r.score;
    return l.key > r.key;
  }
};

// Follows absorbed -> survivor links to the live label.
std::uint64_t resolve(std::unordered_map<std::uint64_t, std::uint64_t>& parent, std::uint64_t label) {
  std::uint64_t root = label;
  for (auto it = parent.find(root); it != parent.end(); it = parent.find(root)) root = it->second;
  for (auto it = parent.find(label); it != parent.end() && it->second != root; it = parent.find(label)) {
    label = std::exchange(it->second, root);
  }
  return root;
}

LabelVolume relabel_with(const LabelVolume& base, std::unordered_map<std::uint64_t, std::uint64_t>& parent) {
  LabelVolume out(base.shape());
  std::unordered_map<std::uint64_t, std::uint64_t> cache;
  for (std::uint64_t i = 0; i < base.size(); ++i) {
    const std::uint64_t label = base[i];
    if (label == 0) continue;
    auto [it, inserted] = cache.try_emplace(label, 0);
    if (inserted) it->second = resolve(parent, label);
    out[i] = it->second;
  }
  return out;
}

}  // namespace

AgglomerationResult agglomerate(Rag rag, const LabelVolume& labels, const Scorer& scorer, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(Errc::InvalidArgument, "theta must lie in [0, 1], got " + std::to_string(theta));
  }
  std::unordered_map<std::uint64_t, std::uint64_t> version;
  for (const std::uint64_t label : rag.labels()) version.emplace(label, 0);

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, LowerPriority> queue;
  auto push = [&](EdgeKey key) {
    const double s = scorer.score(rag.edge(key.a, key.b), rag.node(key.a).size, rag.node(key.b).size);
    queue.push({s, key, version.at(key.a), version.at(key.b)});
  };
  for (const EdgeKey& key : rag.edge_keys()) push(key);

  AgglomerationResult result;
  std::unordered_map<std::uint64_t, std::uint64_t> parent;
  while (!queue.empty()) {
    const QueueEntry top = queue.top();
    queue.pop();
    auto va = version.find(top.key.a);
    auto vb = version.find(top.key.b);
    if (va == version.end() || vb == version.end() || va->second != top.version_a || vb->second != top.version_b) {
      continue;
    }
    if (top.score < theta) break;

    const std::uint64_t survivor = top.key.a;
    const std::uint64_t absorbed = top.key.b;
    rag.merge(survivor, absorbed);
    ++va->second;
    version.erase(vb);
    parent.emplace(absorbed, survivor);
    result.tree.merges.push_back({survivor, absorbed, top.score});
    for (const std::uint64_t other : rag.neighbours(survivor)) push(EdgeKey::of(survivor, other));
  }
  result.labels = relabel_with(labels, parent);
  return result;
}

AgglomerationResult agglomerate(const LabelVolume& labels, const AffinityVolume& aff, const Scorer& scorer,
                                double theta) {
  return agglomerate(build_rag(labels, aff), labels, scorer, theta);
}

LabelVolume apply_threshold(const MergeTree& tree, const LabelVolume& base, double theta) {
  std::unordered_map<std::uint64_t, bool> alive;
  for (const auto label : base.data()) {
    if (label != 0) alive.emplace(label, true);
  }
  for (const MergeRecord& m : tree.merges) {
    auto s = alive.find(m.survivor);
    auto a = alive.find(m.absorbed);
    if (s == alive.end() || a == alive.end() || !s->second || !a->second || m.survivor == m.absorbed) {
      throw Error(Errc::TreeBaseMismatch, "merge " + std::to_string(m.survivor) + " <- " + std::to_string(m.absorbed) +
                                              " does not match the base labeling");
    }
    a->second = false;
  }

  std::unordered_map<std::uint64_t, std::uint64_t> parent;
  for (const MergeRecord& m : tree.merges) {
    if (m.score >= theta) parent.emplace(m.absorbed, m.survivor);
  }
  return relabel_with(base, parent);
}

}  // namespace affseg
