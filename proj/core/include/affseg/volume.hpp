#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace affseg {

/// Volume extent in voxels. Storage is x-fastest row-major, so the flat
/// index of (z, y, x) is ((z * Y) + y) * X + x.
struct Shape3 {
  std::uint64_t z = 1;
  std::uint64_t y = 1;
  std::uint64_t x = 1;

  std::uint64_t voxels() const noexcept { return z * y * x; }
  std::uint64_t operator[](int axis) const noexcept { return axis == 0 ? z : (axis == 1 ? y : x); }
  bool operator==(const Shape3&) const = default;
};

/// Throws Errc::InvalidArgument when a dimension is zero or z*y*x overflows.
void validate_shape(const Shape3& shape);

struct Voxel {
  std::uint64_t z = 0;
  std::uint64_t y = 0;
  std::uint64_t x = 0;

  std::uint64_t operator[](int axis) const noexcept { return axis == 0 ? z : (axis == 1 ? y : x); }
  bool operator==(const Voxel&) const = default;
};

/// Affinity channels: 0 = z, 1 = y, 2 = x. Channel c of voxel v is the edge
/// between v and v + unit(c).
inline constexpr int kChannels = 3;

inline std::uint64_t flat_index(const Shape3& s, std::uint64_t z, std::uint64_t y, std::uint64_t x) noexcept {
  return (z * s.y + y) * s.x + x;
}
inline std::uint64_t flat_index(const Shape3& s, const Voxel& v) noexcept { return flat_index(s, v.z, v.y, v.x); }

inline Voxel unflatten(const Shape3& s, std::uint64_t index) noexcept {
  const std::uint64_t x = index % s.x;
  const std::uint64_t rest = index / s.x;
  return {rest / s.y, rest % s.y, x};
}

inline bool in_bounds(const Shape3& s, const Voxel& v) noexcept { return v.z < s.z && v.y < s.y && v.x < s.x; }

/// Flat-index distance between a voxel and its +1 neighbour along `channel`.
inline std::uint64_t channel_stride(const Shape3& s, int channel) noexcept {
  return channel == 0 ? s.y * s.x : (channel == 1 ? s.x : 1);
}

/// True when voxel + unit(channel) is inside the volume.
inline bool has_edge(const Shape3& s, int channel, const Voxel& v) noexcept {
  return v[channel] + 1 < s[channel];
}

/// Calls f(channel, voxel_index, neighbour_index) for every in-bounds edge,
/// channel-slowest then flat voxel order (the storage order of affinities).
template <class F>
void for_each_edge(const Shape3& s, F&& f) {
  for (int c = 0; c < kChannels; ++c) {
    const std::uint64_t stride = channel_stride(s, c);
    const std::uint64_t zmax = c == 0 ? s.z - 1 : s.z;
    const std::uint64_t ymax = c == 1 ? s.y - 1 : s.y;
    const std::uint64_t xmax = c == 2 ? s.x - 1 : s.x;
    for (std::uint64_t z = 0; z < zmax; ++z) {
      for (std::uint64_t y = 0; y < ymax; ++y) {
        std::uint64_t v = flat_index(s, z, y, 0);
        for (std::uint64_t x = 0; x < xmax; ++x, ++v) {
          f(c, v, v + stride);
        }
      }
    }
  }
}

/// Half-open voxel interval.
struct Range {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::uint64_t length() const noexcept { return end > begin ? end - begin : 0; }
  bool empty() const noexcept { return end <= begin; }
  bool operator==(const Range&) const = default;
};

/// Axis-aligned box, ranges ordered z, y, x.
struct Box {
  std::array<Range, 3> axes{};

  Shape3 shape() const noexcept { return {axes[0].length(), axes[1].length(), axes[2].length()}; }
  bool empty() const noexcept { return axes[0].empty() || axes[1].empty() || axes[2].empty(); }
  bool contains(const Voxel& v) const noexcept {
    for (int a = 0; a < 3; ++a) {
      if (v[a] < axes[a].begin || v[a] >= axes[a].end) return false;
    }
    return true;
  }
  bool operator==(const Box&) const = default;
};

Box intersect(const Box& a, const Box& b) noexcept;
inline Box full_box(const Shape3& s) noexcept { return {{Range{0, s.z}, Range{0, s.y}, Range{0, s.x}}}; }

/// Dense 64-bit segment ids. Label 0 means background / unlabeled.
class LabelVolume {
 public:
  using value_type = std::uint64_t;

  LabelVolume() = default;
  explicit LabelVolume(Shape3 shape, value_type fill = 0);
  LabelVolume(Shape3 shape, std::vector<value_type> data);

  const Shape3& shape() const noexcept { return shape_; }
  std::uint64_t size() const noexcept { return data_.size(); }

  value_type operator[](std::uint64_t i) const noexcept { return data_[i]; }
  value_type& operator[](std::uint64_t i) noexcept { return data_[i]; }
  value_type operator()(std::uint64_t z, std::uint64_t y, std::uint64_t x) const noexcept {
    return data_[flat_index(shape_, z, y, x)];
  }
  value_type& operator()(std::uint64_t z, std::uint64_t y, std::uint64_t x) noexcept {
    return data_[flat_index(shape_, z, y, x)];
  }

  std::span<const value_type> data() const noexcept { return data_; }
  std::span<value_type> data() noexcept { return data_; }

  bool operator==(const LabelVolume&) const = default;

 private:
  Shape3 shape_{};
  std::vector<value_type> data_;
};

/// Per-voxel z/y/x affinities in [0, 1], logical shape [3][z][y][x].
/// Slots whose neighbour lies outside the volume are always 0.
class AffinityVolume {
 public:
  AffinityVolume() = default;
  explicit AffinityVolume(Shape3 shape);
  /// Validates the range, then zeroes out-of-bounds slots.
  AffinityVolume(Shape3 shape, std::vector<float> data);

  const Shape3& shape() const noexcept { return shape_; }
  std::uint64_t voxels() const noexcept { return shape_.voxels(); }

  float get(int channel, std::uint64_t voxel) const noexcept { return data_[channel * voxels() + voxel]; }
  float operator()(int channel, std::uint64_t z, std::uint64_t y, std::uint64_t x) const noexcept {
    return get(channel, flat_index(shape_, z, y, x));
  }
  /// Throws OutOfBounds for a slot without an in-bounds neighbour and
  /// InvalidValue for values outside [0, 1].
  void set(int channel, const Voxel& v, float value);
  void set(int channel, std::uint64_t z, std::uint64_t y, std::uint64_t x, float value) {
    set(channel, Voxel{z, y, x}, value);
  }

  /// Edge-indexed view: slot channel * voxels + voxel.
  std::span<const float> data() const noexcept { return data_; }

  bool operator==(const AffinityVolume&) const = default;

 private:
  friend class AffinityBuilder;
  Shape3 shape_{};
  std::vector<float> data_;
};

/// Per-edge values laid out like an AffinityVolume but with no range
/// restriction. Used for pair counts and gradients.
template <class T>
struct EdgeArray {
  Shape3 shape{};
  std::vector<T> values;

  EdgeArray() = default;
  explicit EdgeArray(Shape3 s) : shape(s), values(static_cast<std::size_t>(kChannels * s.voxels()), T{}) {}

  T& at(int channel, std::uint64_t voxel) { return values[channel * shape.voxels() + voxel]; }
  const T& at(int channel, std::uint64_t voxel) const { return values[channel * shape.voxels() + voxel]; }
  bool operator==(const EdgeArray&) const = default;
};

/// Builds an AffinityVolume from per-edge values; slots are clamped to [0, 1]
/// and out-of-bounds slots stay 0.
class AffinityBuilder {
 public:
  explicit AffinityBuilder(Shape3 shape);
  void set(int channel, std::uint64_t voxel, float value);
  AffinityVolume build() &&;

 private:
  AffinityVolume vol_;
};

/// Perfect encoding of a labeling: 1 for in-bounds pairs with the same nonzero
/// label, 0 otherwise.
AffinityVolume affinities_from_labels(const LabelVolume& labels);

LabelVolume crop(const LabelVolume& labels, const Box& box);
/// Edges leaving the box become out-of-bounds slots (0).
AffinityVolume crop(const AffinityVolume& aff, const Box& box);

void require_same_shape(const Shape3& a, const Shape3& b, const char* what);

/// Number of distinct nonzero labels.
std::uint64_t count_segments(const LabelVolume& labels);

/// Relabels nonzero ids to 1..K in order of first occurrence (flat index).
LabelVolume relabel_dense(const LabelVolume& labels);

/// 6-connected components of equal nonzero labels, numbered 1..K by first voxel.
LabelVolume connected_components(const LabelVolume& labels);

/// True when both labelings induce the same partition, with 0 required to map to 0.
bool same_partition(const LabelVolume& a, const LabelVolume& b);

}  // namespace affseg
