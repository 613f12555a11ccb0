#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace affseg {

/// Disjoint sets over 0..n-1 with union by size and path halving.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::uint64_t{0});
  }

  std::size_t size() const noexcept { return parent_.size(); }

  std::uint64_t find(std::uint64_t a) noexcept {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  /// Returns the surviving root, or the shared root if already joined.
  std::uint64_t unite(std::uint64_t a, std::uint64_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  /// Attaches root `child` under root `root` regardless of size.
  void attach(std::uint64_t root, std::uint64_t child) noexcept {
    parent_[child] = root;
    size_[root] += size_[child];
  }

  std::uint64_t set_size(std::uint64_t a) noexcept { return size_[find(a)]; }

 private:
  std::vector<std::uint64_t> parent_;
  std::vector<std::uint64_t> size_;
};

}  // namespace affseg
