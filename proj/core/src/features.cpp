#include "affseg/features.hpp"

#include <algorithm>
#include <cmath>

namespace affseg {
namespace {
constexpr double kVarianceFloor = 1e-12;
}

std::size_t histogram_bin(float affinity) noexcept {
  const double scaled = static_cast<double>(affinity) * kHistogramBins;
  if (!(scaled > 0.0)) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(scaled), kHistogramBins - 1);
}

void ChannelMoments::add(float affinity) noexcept {
  ChannelMoments one;
  one.count = 1;
  one.sum = affinity;
  one.min = affinity;
  one.max = affinity;
  one.histogram[histogram_bin(affinity)] = 1;
  merge(one);
}

void ChannelMoments::merge(const ChannelMoments& other) noexcept {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  const double n = na + nb;
  const double d = other.sum / nb - sum / na;
  const double d2 = d * d;
  const double m4_new = m4 + other.m4 + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                        6.0 * d2 * (na * na * other.m2 + nb * nb * m2) / (n * n) +
                        4.0 * d * (na * other.m3 - nb * m3) / n;
  const double m3_new = m3 + other.m3 + d2 * d * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * other.m2 - nb * m2) / n;
  m2 += other.m2 + d2 * na * nb / n;
  m3 = m3_new;
  m4 = m4_new;
  count += other.count;
  sum += other.sum;
  min = std::min(min, other.min);
  max = std::max(max, other.max);
  for (std::size_t b = 0; b < kHistogramBins; ++b) histogram[b] += other.histogram[b];
}

double ChannelMoments::mean() const noexcept { return count == 0 ? 0.0 : sum / static_cast<double>(count); }

double ChannelMoments::variance() const noexcept {
  return count == 0 ? 0.0 : std::max(0.0, m2 / static_cast<double>(count));
}

double ChannelMoments::skewness() const noexcept {
  const double var = variance();
  if (var < kVarianceFloor) return 0.0;
  return m3 / static_cast<double>(count) / (var * std::sqrt(var));
}

double ChannelMoments::kurtosis() const noexcept {
  const double var = variance();
  if (var < kVarianceFloor) return 0.0;
  return m4 / static_cast<double>(count) / (var * var);
}

void FeatureAccumulator::merge(const FeatureAccumulator& other) noexcept {
  for (int c = 0; c < 3; ++c) channels[c].merge(other.channels[c]);
}

std::uint64_t FeatureAccumulator::total_count() const noexcept {
  return channels[0].count + channels[1].count + channels[2].count;
}

double FeatureAccumulator::total_sum() const noexcept { return channels[0].sum + channels[1].sum + channels[2].sum; }

double FeatureAccumulator::mean_affinity() const noexcept {
  const std::uint64_t n = total_count();
  return n == 0 ? 0.0 : total_sum() / static_cast<double>(n);
}

FeatureAccumulator combine(const FeatureAccumulator& a, const FeatureAccumulator& b) noexcept {
  FeatureAccumulator out = a;
  out.merge(b);
  return out;
}

FeatureVector edge_features(const FeatureAccumulator& boundary, std::uint64_t size_a, std::uint64_t size_b) {
  FeatureVector f{};
  std::size_t k = 0;
  for (const auto& ch : boundary.channels) {
    const bool any = ch.count > 0;
    f[k++] = ch.mean();
    f[k++] = ch.variance();
    f[k++] = ch.skewness();
    f[k++] = ch.kurtosis();
    f[k++] = any ? ch.min : 0.0;
    f[k++] = any ? ch.max : 0.0;
    for (const auto bin : ch.histogram) {
      f[k++] = any ? static_cast<double>(bin) / static_cast<double>(ch.count) : 0.0;
    }
  }
  const std::uint64_t a = std::max<std::uint64_t>(size_a, 1);
  const std::uint64_t b = std::max<std::uint64_t>(size_b, 1);
  const std::uint64_t small = std::min(a, b);
  const std::uint64_t large = std::max(a, b);
  f[k++] = std::log(static_cast<double>(std::max<std::uint64_t>(boundary.total_count(), 1)));
  f[k++] = std::log(static_cast<double>(small));
  f[k++] = std::log(static_cast<double>(large));
  return f;
}

}  // namespace affseg
