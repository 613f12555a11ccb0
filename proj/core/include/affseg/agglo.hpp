#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "affseg/rag.hpp"
#include "affseg/scorer.hpp"
#include "affseg/volume.hpp"

namespace affseg {

struct MergeRecord {
  std::uint64_t survivor = 0;
  std::uint64_t absorbed = 0;
  double score = 0.0;

  bool operator==(const MergeRecord&) const = default;
};

/// Ordered dendrogram of applied merges. Replaying a score-filtered subset on
/// the base labeling reproduces any threshold.
struct MergeTree {
  std::vector<MergeRecord> merges;

  bool operator==(const MergeTree&) const = default;
};

/// Text form: one "survivor absorbed score" line per merge, scores printed
/// with 17 significant digits.
std::string format_merge_tree(const MergeTree& tree);
MergeTree parse_merge_tree(const std::string& text);
void write_merge_tree(const MergeTree& tree, const std::filesystem::path& path);
MergeTree read_merge_tree(const std::filesystem::path& path);

struct AgglomerationResult {
  LabelVolume labels;
  MergeTree tree;
};

/// Greedy best-first merging. The queue is ordered by score descending, then
/// by the smaller label pair; entries carry node version stamps and stale ones
/// are skipped. The smaller label survives each merge, after which every edge
/// of the merged node is re-scored. Stops at the first valid score < theta.
AgglomerationResult agglomerate(const LabelVolume& labels, const AffinityVolume& aff, const Scorer& scorer,
                                double theta);
/// Same loop on a prebuilt RAG of `labels` (consumed).
AgglomerationResult agglomerate(Rag rag, const LabelVolume& labels, const Scorer& scorer, double theta);

/// Replays, in recorded order, the merges whose score is >= theta. Throws
/// TreeBaseMismatch when the tree references labels the base does not hold
/// or absorbs a label twice.
LabelVolume apply_threshold(const MergeTree& tree, const LabelVolume& base, double theta);

struct TrainingExample {
  FeatureVector features{};
  bool merge = false;
};

struct TrainingReport {
  std::vector<TrainingExample> examples;
  std::size_t rounds = 0;
  /// Fraction of collected examples the fitted model classifies correctly at 0.5.
  double accuracy = 0.0;
};

struct TrainingOptions {
  std::size_t epochs = 500;
  double step = 0.1;
};

/// Collects merge decisions by simulated agglomeration against ground truth
/// and fits a logistic scorer. An edge is a positive example iff both
/// segments have the same dominant GT label, each with purity >= 0.5.
/// Positives are merged and the touched edges re-examined each round until a
/// round yields no positives. Throws DegenerateTraining if every example has
/// the same class (or there are none).
Scorer train_scorer(const Rag& rag, const LabelVolume& labels, const LabelVolume& gt,
                    const TrainingOptions& options = {}, TrainingReport* report = nullptr);
Scorer train_scorer(const LabelVolume& labels, const AffinityVolume& aff, const LabelVolume& gt,
                    const TrainingOptions& options = {}, TrainingReport* report = nullptr);

/// Full-batch gradient descent on standardized features; the standardization
/// is folded back into the returned weights.
Scorer fit_logistic(const std::vector<TrainingExample>& examples, const TrainingOptions& options);

}  // namespace affseg
