#include "affseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <utility>

#include "affseg/error.hpp"

namespace affseg {

ViScore split_vi(const LabelVolume& seg, const LabelVolume& gt) {
  require_same_shape(seg.shape(), gt.shape(), "split_vi");

  // Contingency entries are summed in sorted order so the result does not
  // depend on hash iteration order.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  pairs.reserve(gt.size());
  for (std::uint64_t i = 0; i < gt.size(); ++i) {
    if (gt[i] != 0) pairs.emplace_back(seg[i], gt[i]);
  }
  if (pairs.empty()) throw Error(Errc::EmptyOverlap, "ground truth has no labeled voxels");
  std::sort(pairs.begin(), pairs.end());

  std::unordered_map<std::uint64_t, std::uint64_t> seg_count;
  std::unordered_map<std::uint64_t, std::uint64_t> gt_count;
  for (const auto& [s, g] : pairs) {
    ++seg_count[s];
    ++gt_count[g];
  }

  const double n = static_cast<double>(pairs.size());
  ViScore score;
  for (std::size_t i = 0; i < pairs.size();) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j] == pairs[i]) ++j;
    const double joint = static_cast<double>(j - i);
    const double p = joint / n;
    score.vi_under += p * std::log2(static_cast<double>(seg_count[pairs[i].first]) / joint);
    score.vi_over += p * std::log2(static_cast<double>(gt_count[pairs[i].second]) / joint);
    i = j;
  }
  return score;
}

ViCurve vi_curve(const MergeTree& tree, const LabelVolume& base, const LabelVolume& gt,
                 const std::vector<double>& thetas) {
  for (std::size_t i = 1; i < thetas.size(); ++i) {
    if (!(thetas[i] < thetas[i - 1])) throw Error(Errc::InvalidArgument, "thresholds must be strictly decreasing");
  }
  ViCurve curve;
  curve.reserve(thetas.size());
  for (const double theta : thetas) curve.push_back({theta, split_vi(apply_threshold(tree, base, theta), gt)});
  return curve;
}

std::string format_vi(const ViScore& score) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f", score.vi_under, score.vi_over);
  return buf;
}

std::string format_vi_curve(const ViCurve& curve) {
  std::string out = "theta,vi_under,vi_over\n";
  char buf[96];
  for (const auto& point : curve) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9f\n", point.theta, point.score.vi_under, point.score.vi_over);
    out += buf;
  }
  return out;
}

}  // namespace affseg
