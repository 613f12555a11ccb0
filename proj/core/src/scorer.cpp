#include "affseg/scorer.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include "affseg/error.hpp"
#include "affseg/volume_io.hpp"

namespace affseg {

Scorer Scorer::logistic(const FeatureVector& weights, double bias) noexcept {
  Scorer s;
  s.kind_ = ScorerKind::Logistic;
  s.weights_ = weights;
  s.bias_ = bias;
  return s;
}

double Scorer::probability(const FeatureVector& features) const noexcept {
  double z = bias_;
  for (std::size_t i = 0; i < kFeatureCount; ++i) z += weights_[i] * features[i];
  return 1.0 / (1.0 + std::exp(-z));
}

double Scorer::score(const FeatureAccumulator& boundary, std::uint64_t size_a, std::uint64_t size_b) const {
  if (kind_ == ScorerKind::MeanAffinity) return boundary.mean_affinity();
  return probability(edge_features(boundary, size_a, size_b));
}

void save_model(const Scorer& logistic, const std::filesystem::path& path) {
  if (logistic.kind() != ScorerKind::Logistic) {
    throw Error(Errc::InvalidArgument, "only logistic scorers have a model file");
  }
  std::vector<std::byte> bytes;
  bytes.reserve(kModelFileBytes);
  bytes.push_back(static_cast<std::byte>(kModelFormatVersion));
  auto put = [&](double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xFF));
  };
  for (const double w : logistic.weights()) put(w);
  put(logistic.bias());
  write_file_bytes(path, bytes);
}

Scorer load_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() != kModelFileBytes) {
    throw Error(Errc::TruncatedPayload, "model file must be " + std::to_string(kModelFileBytes) + " bytes");
  }
  if (std::to_integer<std::uint8_t>(bytes[0]) != kModelFormatVersion) {
    throw Error(Errc::BadHeader, "unsupported model version");
  }
  auto get = [&](std::size_t index) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(bytes[1 + 8 * index + i])) << (8 * i);
    }
    return std::bit_cast<double>(bits);
  };
  FeatureVector weights{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) weights[i] = get(i);
  return Scorer::logistic(weights, get(kFeatureCount));
}

}  // namespace affseg
