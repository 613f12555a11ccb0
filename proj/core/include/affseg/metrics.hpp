#pragma once

#include <string>
#include <vector>

#include "affseg/agglo.hpp"
#include "affseg/volume.hpp"

namespace affseg {

/// Split variation of information, in bits.
struct ViScore {
  double vi_under = 0.0;  // H(GT | Seg): false merges
  double vi_over = 0.0;   // H(Seg | GT): false splits

  double total() const noexcept { return vi_under + vi_over; }
  bool operator==(const ViScore&) const = default;
};

/// Voxels with gt == 0 are ignored; seg == 0 on a labeled voxel counts as one
/// extra segment. Throws ShapeMismatch, or EmptyOverlap when gt has no
/// labeled voxel.
ViScore split_vi(const LabelVolume& seg, const LabelVolume& gt);

struct ViCurvePoint {
  double theta = 0.0;
  ViScore score;
};
using ViCurve = std::vector<ViCurvePoint>;

/// One split_vi per threshold replayed from the merge tree. Thresholds must
/// be strictly decreasing.
ViCurve vi_curve(const MergeTree& tree, const LabelVolume& base, const LabelVolume& gt,
                 const std::vector<double>& thetas);

/// CSV with header "theta,vi_under,vi_over".
std::string format_vi_curve(const ViCurve& curve);

/// "vi_under,vi_over" with six decimals.
std::string format_vi(const ViScore& score);

}  // namespace affseg
