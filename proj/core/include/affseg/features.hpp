#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace affseg {

inline constexpr std::size_t kHistogramBins = 10;
inline constexpr std::size_t kFeaturesPerChannel = 6 + kHistogramBins;
/// 3 channels x (mean, variance, skewness, kurtosis, min, max, 10 bins) plus
/// log boundary count, log smaller size, log larger size.
inline constexpr std::size_t kFeatureCount = 3 * kFeaturesPerChannel + 3;

using FeatureVector = std::array<double, kFeatureCount>;

/// Count, plain sum, central moment sums, extrema and a 10-bin histogram
/// over [0, 1] of the affinities seen on one channel. Central sums are merged
/// with the pairwise update formulas, which stay accurate when the variance is
/// small next to the squared mean (raw power sums do not).
struct ChannelMoments {
  std::uint64_t count = 0;
  double sum = 0.0;
  double m2 = 0.0;  // sum of (a - mean)^2
  double m3 = 0.0;
  double m4 = 0.0;
  float min = std::numeric_limits<float>::infinity();
  float max = -std::numeric_limits<float>::infinity();
  std::array<std::uint64_t, kHistogramBins> histogram{};

  void add(float affinity) noexcept;
  void merge(const ChannelMoments& other) noexcept;

  double mean() const noexcept;
  /// Population variance.
  double variance() const noexcept;
  /// Both are 0 when the variance is below 1e-12. Kurtosis is m4 / m2^2
  /// (not excess).
  double skewness() const noexcept;
  double kurtosis() const noexcept;

  bool operator==(const ChannelMoments&) const = default;
};

std::size_t histogram_bin(float affinity) noexcept;

/// Boundary statistics of one RAG edge (or a node interior). Mergeable:
/// merging two accumulators equals accumulating the union of their samples.
struct FeatureAccumulator {
  std::array<ChannelMoments, 3> channels{};

  void add(int channel, float affinity) noexcept { channels[channel].add(affinity); }
  void merge(const FeatureAccumulator& other) noexcept;

  std::uint64_t total_count() const noexcept;
  double total_sum() const noexcept;
  /// Mean over all channels pooled; 0 when empty.
  double mean_affinity() const noexcept;

  bool operator==(const FeatureAccumulator&) const = default;
};

FeatureAccumulator combine(const FeatureAccumulator& a, const FeatureAccumulator& b) noexcept;

/// Fixed-order feature vector of a boundary between segments of the given sizes.
FeatureVector edge_features(const FeatureAccumulator& boundary, std::uint64_t size_a, std::uint64_t size_b);

}  // namespace affseg
