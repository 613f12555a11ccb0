#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "affseg/features.hpp"

namespace affseg {

enum class ScorerKind { MeanAffinity, Logistic };

/// Merge desirability of a boundary, always in [0, 1].
class Scorer {
 public:
  static Scorer mean_affinity() noexcept { return Scorer{}; }
  static Scorer logistic(const FeatureVector& weights, double bias) noexcept;

  ScorerKind kind() const noexcept { return kind_; }
  const FeatureVector& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }

  double score(const FeatureAccumulator& boundary, std::uint64_t size_a, std::uint64_t size_b) const;
  /// Logistic probability of a raw feature vector (ignores kind).
  double probability(const FeatureVector& features) const noexcept;

 private:
  ScorerKind kind_ = ScorerKind::MeanAffinity;
  FeatureVector weights_{};
  double bias_ = 0.0;
};

/// Model file: one version byte (1), then 51 weights and the bias as f64 LE.
inline constexpr std::uint8_t kModelFormatVersion = 1;
inline constexpr std::size_t kModelFileBytes = 1 + 8 * (kFeatureCount + 1);

void save_model(const Scorer& logistic, const std::filesystem::path& path);
Scorer load_model(const std::filesystem::path& path);

}  // namespace affseg
