#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "affseg/agglo.hpp"
#include "affseg/error.hpp"

namespace affseg {
namespace {

constexpr double kPurityFloor = 0.5;
constexpr double kStdFloor = 1e-12;

using GtHistogram = std::unordered_map<std::uint64_t, std::uint64_t>;

struct Dominance {
  std::uint64_t label = 0;  // 0 when the segment holds no labeled voxel
  double purity = 0.0;
};

// Plurality GT label over labeled voxels; ties go to the smaller GT id.
Dominance dominant(const GtHistogram& hist) {
  Dominance d;
  std::uint64_t best = 0;
  std::uint64_t total = 0;
  for (const auto& [label, count] : hist) {
    total += count;
    if (count > best || (count == best && label < d.label)) {
      best = count;
      d.label = label;
    }
  }
  if (total > 0) d.purity = static_cast<double>(best) / static_cast<double>(total);
  return d;
}

bool is_merge(const Dominance& a, const Dominance& b) {
  return a.label != 0 && a.label == b.label && a.purity >= kPurityFloor && b.purity >= kPurityFloor;
}

}  // namespace

Scorer fit_logistic(const std::vector<TrainingExample>& examples, const TrainingOptions& options) {
  const std::size_t m = examples.size();
  std::size_t positives = 0;
  for (const auto& ex : examples) positives += ex.merge ? 1 : 0;
  if (m == 0 || positives == 0 || positives == m) {
    throw Error(Errc::DegenerateTraining, std::to_string(m) + " examples, " + std::to_string(positives) + " positive");
  }

  FeatureVector mean{};
  FeatureVector stddev{};
  for (const auto& ex : examples) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) mean[j] += ex.features[j];
  }
  for (auto& v : mean) v /= static_cast<double>(m);
  for (const auto& ex : examples) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const double d = ex.features[j] - mean[j];
      stddev[j] += d * d;
    }
  }
  for (auto& v : stddev) {
    v = std::sqrt(v / static_cast<double>(m));
    if (v < kStdFloor) v = 1.0;
  }

  std::vector<FeatureVector> x(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) x[i][j] = (examples[i].features[j] - mean[j]) / stddev[j];
  }

  FeatureVector w{};
  double b = 0.0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    FeatureVector grad{};
    double grad_b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double z = b;
      for (std::size_t j = 0; j < kFeatureCount; ++j) z += w[j] * x[i][j];
      const double residual = 1.0 / (1.0 + std::exp(-z)) - (examples[i].merge ? 1.0 : 0.0);
      for (std::size_t j = 0; j < kFeatureCount; ++j) grad[j] += residual * x[i][j];
      grad_b += residual;
    }
    for (std::size_t j = 0; j < kFeatureCount; ++j) w[j] -= options.step * grad[j] / static_cast<double>(m);
    b -= options.step * grad_b / static_cast<double>(m);
  }

  FeatureVector folded{};
  double folded_bias = b;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    folded[j] = w[j] / stddev[j];
    folded_bias -= w[j] * mean[j] / stddev[j];
  }
  return Scorer::logistic(folded, folded_bias);
}

Scorer train_scorer(const Rag& initial, const LabelVolume& labels, const LabelVolume& gt,
                    const TrainingOptions& options, TrainingReport* report) {
  require_same_shape(labels.shape(), gt.shape(), "train_scorer");
  Rag rag = initial;
  std::unordered_map<std::uint64_t, GtHistogram> hist;
  for (std::uint64_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && gt[i] != 0) ++hist[labels[i]][gt[i]];
  }

  std::vector<TrainingExample> examples;
  std::vector<EdgeKey> pending = rag.edge_keys();
  std::size_t rounds = 0;
  while (!pending.empty()) {
    ++rounds;
    std::vector<EdgeKey> positives;
    for (const EdgeKey& key : pending) {
      const bool merge = is_merge(dominant(hist[key.a]), dominant(hist[key.b]));
      examples.push_back({edge_features(rag, key.a, key.b), merge});
      if (merge) positives.push_back(key);
    }
    if (positives.empty()) break;

    // Apply every positive of this round; the smaller live label survives.
    std::unordered_map<std::uint64_t, std::uint64_t> parent;
    auto live = [&](std::uint64_t label) {
      for (auto it = parent.find(label); it != parent.end(); it = parent.find(label)) label = it->second;
      return label;
    };
    std::set<std::uint64_t> touched;
    for (const EdgeKey& key : positives) {
      const std::uint64_t a = live(key.a);
      const std::uint64_t b = live(key.b);
      if (a == b) continue;
      const std::uint64_t survivor = std::min(a, b);
      const std::uint64_t absorbed = std::max(a, b);
      rag.merge(survivor, absorbed);
      for (const auto& [label, count] : hist[absorbed]) hist[survivor][label] += count;
      hist.erase(absorbed);
      parent.emplace(absorbed, survivor);
      touched.erase(absorbed);
      touched.insert(survivor);
    }

    std::set<EdgeKey> next;
    for (const std::uint64_t label : touched) {
      for (const std::uint64_t other : rag.neighbours(label)) next.insert(EdgeKey::of(label, other));
    }
    pending.assign(next.begin(), next.end());
  }

  Scorer scorer = fit_logistic(examples, options);
  if (report != nullptr) {
    std::size_t correct = 0;
    for (const auto& ex : examples) correct += ((scorer.probability(ex.features) >= 0.5) == ex.merge) ? 1 : 0;
    report->accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
    report->rounds = rounds;
    report->examples = std::move(examples);
  }
  return scorer;
}

Scorer train_scorer(const LabelVolume& labels, const AffinityVolume& aff, const LabelVolume& gt,
                    const TrainingOptions& options, TrainingReport* report) {
  return train_scorer(build_rag(labels, aff), labels, gt, options, report);
}

}  // namespace affseg
