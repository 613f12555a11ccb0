#include "affseg/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "affseg/error.hpp"
#include "affseg/union_find.hpp"

namespace affseg {

void validate_shape(const Shape3& shape) {
  if (shape.z == 0 || shape.y == 0 || shape.x == 0) {
    throw Error(Errc::InvalidArgument, "volume dimensions must be >= 1");
  }
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (shape.y > kMax / shape.x || shape.z > kMax / (shape.y * shape.x)) {
    throw Error(Errc::InvalidArgument, "voxel count overflows 64 bits");
  }
  // Affinity slots are 3 * voxels and must also be addressable.
  if (shape.voxels() > kMax / kChannels) {
    throw Error(Errc::InvalidArgument, "affinity slot count overflows 64 bits");
  }
}

void require_same_shape(const Shape3& a, const Shape3& b, const char* what) {
  if (!(a == b)) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": (" + std::to_string(a.z) + "," + std::to_string(a.y) + "," +
                                         std::to_string(a.x) + ") vs (" + std::to_string(b.z) + "," +
                                         std::to_string(b.y) + "," + std::to_string(b.x) + ")");
  }
}

Box intersect(const Box& a, const Box& b) noexcept {
  Box out;
  for (int i = 0; i < 3; ++i) {
    out.axes[i].begin = std::max(a.axes[i].begin, b.axes[i].begin);
    out.axes[i].end = std::max(out.axes[i].begin, std::min(a.axes[i].end, b.axes[i].end));
  }
  return out;
}

LabelVolume::LabelVolume(Shape3 shape, value_type fill) : shape_(shape) {
  validate_shape(shape);
  data_.assign(shape.voxels(), fill);
}

LabelVolume::LabelVolume(Shape3 shape, std::vector<value_type> data) : shape_(shape), data_(std::move(data)) {
  validate_shape(shape);
  if (data_.size() != shape.voxels()) {
    throw Error(Errc::ShapeMismatch, "label data length " + std::to_string(data_.size()) + " != " +
                                         std::to_string(shape.voxels()) + " voxels");
  }
}

AffinityVolume::AffinityVolume(Shape3 shape) : shape_(shape) {
  validate_shape(shape);
  data_.assign(kChannels * shape.voxels(), 0.0f);
}

AffinityVolume::AffinityVolume(Shape3 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  validate_shape(shape);
  const std::uint64_t n = shape.voxels();
  if (data_.size() != kChannels * n) {
    throw Error(Errc::ShapeMismatch, "affinity data length " + std::to_string(data_.size()) + " != 3 * " +
                                         std::to_string(n) + " voxels");
  }
  for (const float a : data_) {
    if (!(a >= 0.0f && a <= 1.0f)) {
      throw Error(Errc::InvalidValue, "affinity outside [0, 1]: " + std::to_string(a));
    }
  }
  for (int c = 0; c < kChannels; ++c) {
    float* slots = data_.data() + c * n;
    for (std::uint64_t z = 0; z < shape.z; ++z) {
      for (std::uint64_t y = 0; y < shape.y; ++y) {
        for (std::uint64_t x = 0; x < shape.x; ++x) {
          if (!has_edge(shape, c, Voxel{z, y, x})) slots[flat_index(shape, z, y, x)] = 0.0f;
        }
      }
    }
  }
}

void AffinityVolume::set(int channel, const Voxel& v, float value) {
  if (channel < 0 || channel >= kChannels || !in_bounds(shape_, v) || !has_edge(shape_, channel, v)) {
    throw Error(Errc::OutOfBounds, "affinity slot has no in-bounds neighbour");
  }
  if (!(value >= 0.0f && value <= 1.0f)) {
    throw Error(Errc::InvalidValue, "affinity outside [0, 1]: " + std::to_string(value));
  }
  data_[channel * voxels() + flat_index(shape_, v)] = value;
}

AffinityBuilder::AffinityBuilder(Shape3 shape) : vol_(shape) {}

void AffinityBuilder::set(int channel, std::uint64_t voxel, float value) {
  vol_.data_[channel * vol_.voxels() + voxel] = std::clamp(std::isnan(value) ? 0.0f : value, 0.0f, 1.0f);
}

AffinityVolume AffinityBuilder::build() && {
  // Out-of-bounds slots are re-zeroed in case a caller wrote one.
  const Shape3& s = vol_.shape_;
  for (int c = 0; c < kChannels; ++c) {
    float* slots = vol_.data_.data() + c * s.voxels();
    for (std::uint64_t z = 0; z < s.z; ++z) {
      for (std::uint64_t y = 0; y < s.y; ++y) {
        for (std::uint64_t x = 0; x < s.x; ++x) {
          if (!has_edge(s, c, Voxel{z, y, x})) slots[flat_index(s, z, y, x)] = 0.0f;
        }
      }
    }
  }
  return std::move(vol_);
}

AffinityVolume affinities_from_labels(const LabelVolume& labels) {
  AffinityBuilder b(labels.shape());
  for_each_edge(labels.shape(), [&](int c, std::uint64_t v, std::uint64_t u) {
    if (labels[v] != 0 && labels[v] == labels[u]) b.set(c, v, 1.0f);
  });
  return std::move(b).build();
}

LabelVolume crop(const LabelVolume& labels, const Box& box) {
  const Shape3 out_shape = box.shape();
  for (int a = 0; a < 3; ++a) {
    if (box.axes[a].end > labels.shape()[a] || box.empty()) {
      throw Error(Errc::OutOfBounds, "crop box outside volume");
    }
  }
  LabelVolume out(out_shape);
  for (std::uint64_t z = 0; z < out_shape.z; ++z) {
    for (std::uint64_t y = 0; y < out_shape.y; ++y) {
      const std::uint64_t src = flat_index(labels.shape(), z + box.axes[0].begin, y + box.axes[1].begin, box.axes[2].begin);
      const std::uint64_t dst = flat_index(out_shape, z, y, 0);
      std::copy_n(labels.data().begin() + src, out_shape.x, out.data().begin() + dst);
    }
  }
  return out;
}

AffinityVolume crop(const AffinityVolume& aff, const Box& box) {
  const Shape3 out_shape = box.shape();
  for (int a = 0; a < 3; ++a) {
    if (box.axes[a].end > aff.shape()[a] || box.empty()) {
      throw Error(Errc::OutOfBounds, "crop box outside volume");
    }
  }
  AffinityBuilder b(out_shape);
  for_each_edge(out_shape, [&](int c, std::uint64_t v, std::uint64_t) {
    const Voxel local = unflatten(out_shape, v);
    const Voxel global{local.z + box.axes[0].begin, local.y + box.axes[1].begin, local.x + box.axes[2].begin};
    b.set(c, v, aff.get(c, flat_index(aff.shape(), global)));
  });
  return std::move(b).build();
}

std::uint64_t count_segments(const LabelVolume& labels) {
  std::vector<std::uint64_t> ids(labels.data().begin(), labels.data().end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids.size() - ((!ids.empty() && ids.front() == 0) ? 1 : 0);
}

LabelVolume relabel_dense(const LabelVolume& labels) {
  LabelVolume out(labels.shape());
  std::unordered_map<std::uint64_t, std::uint64_t> remap;
  std::uint64_t next = 1;
  for (std::uint64_t i = 0; i < labels.size(); ++i) {
    const auto id = labels[i];
    if (id == 0) continue;
    auto [it, inserted] = remap.try_emplace(id, next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return out;
}

LabelVolume connected_components(const LabelVolume& labels) {
  UnionFind uf(labels.size());
  for_each_edge(labels.shape(), [&](int, std::uint64_t v, std::uint64_t u) {
    if (labels[v] != 0 && labels[v] == labels[u]) uf.unite(v, u);
  });
  LabelVolume roots(labels.shape());
  for (std::uint64_t i = 0; i < labels.size(); ++i) {
    roots[i] = labels[i] == 0 ? 0 : uf.find(i) + 1;
  }
  return relabel_dense(roots);
}

bool same_partition(const LabelVolume& a, const LabelVolume& b) {
  if (!(a.shape() == b.shape())) return false;
  std::unordered_map<std::uint64_t, std::uint64_t> ab;
  std::unordered_map<std::uint64_t, std::uint64_t> ba;
  for (std::uint64_t i = 0; i < a.size(); ++i) {
    const auto la = a[i];
    const auto lb = b[i];
    if ((la == 0) != (lb == 0)) return false;
    if (la == 0) continue;
    auto [ia, na] = ab.try_emplace(la, lb);
    if (!na && ia->second != lb) return false;
    auto [ib, nb] = ba.try_emplace(lb, la);
    if (!nb && ib->second != la) return false;
  }
  return true;
}

}  // namespace affseg
