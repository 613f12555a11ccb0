#include <random>

#include "affseg/error.hpp"
#include "affseg/parallel.hpp"
#include "affseg/synth.hpp"
#include "affseg/union_find.hpp"
#include "affseg/zwatershed.hpp"
#include "doctest.h"

using namespace affseg;

namespace {

AffinityVolume chain4() {
  AffinityVolume aff(Shape3{1, 1, 4});
  aff.set(2, 0, 0, 0, 0.95f);
  aff.set(2, 0, 0, 1, 0.3f);
  aff.set(2, 0, 0, 2, 0.9f);
  return aff;
}

AffinityVolume uniform(const Shape3& s, float value) {
  AffinityBuilder b(s);
  for_each_edge(s, [&](int c, std::uint64_t v, std::uint64_t) { b.set(c, v, value); });
  return std::move(b).build();
}

AffinityVolume random_affinities(const Shape3& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  AffinityBuilder b(s);
  for_each_edge(s, [&](int c, std::uint64_t v, std::uint64_t) { b.set(c, v, unit(rng)); });
  return std::move(b).build();
}

// Every segment is one 6-connected component over in-bounds edges.
bool segments_connected(const LabelVolume& labels) {
  const auto k = count_segments(labels);
  return count_segments(connected_components(labels)) == k;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(WatershedParams{0.5f, 0.6f, 0, 0.55f}), Error);
  CHECK_THROWS_AS(validate(WatershedParams{0.9f, 0.2f, 0, 0.95f}), Error);
  CHECK_NOTHROW(validate(WatershedParams{}));
}

TEST_CASE("all-high affinities give one segment, all-zero give background") {
  const Shape3 s{3, 4, 5};
  const auto full = zwatershed(uniform(s, 1.0f), WatershedParams{0.9f, 0.1f, 0, 0.5f});
  for (const auto id : full.labels.data()) CHECK(id == 1);
  CHECK(full.stats.segments() == 1);
  CHECK(full.stats.sizes[1] == s.voxels());

  const auto empty = zwatershed(uniform(s, 0.0f), WatershedParams{0.9f, 0.1f, 0, 0.5f});
  for (const auto id : empty.labels.data()) CHECK(id == 0);
  CHECK(empty.stats.background() == s.voxels());
  CHECK(empty.stats.segments() == 0);
}

TEST_CASE("four-voxel chain: two basins, merged by the size filter") {
  const auto split = zwatershed(chain4(), WatershedParams{0.9f, 0.2f, 0, 0.2f});
  CHECK(split.labels == LabelVolume(Shape3{1, 1, 4}, {1, 1, 2, 2}));

  const auto merged = zwatershed(chain4(), WatershedParams{0.9f, 0.2f, 3, 0.25f});
  CHECK(merged.labels == LabelVolume(Shape3{1, 1, 4}, {1, 1, 1, 1}));

  // Boundary edge below t_merge: both basins stay small and become background.
  const auto dropped = zwatershed(chain4(), WatershedParams{0.9f, 0.2f, 3, 0.35f});
  CHECK(dropped.labels == LabelVolume(Shape3{1, 1, 4}, {0, 0, 0, 0}));
}

TEST_CASE("steepest ascent joins the basin of the best neighbour") {
  // v0 -0.95- v1 -0.5- v2 -0.4- v3 -0.95- v4: v2 follows its 0.5 edge to v1.
  AffinityVolume aff(Shape3{1, 1, 5});
  aff.set(2, 0, 0, 0, 0.95f);
  aff.set(2, 0, 0, 1, 0.5f);
  aff.set(2, 0, 0, 2, 0.4f);
  aff.set(2, 0, 0, 3, 0.95f);
  const auto r = zwatershed(aff, WatershedParams{0.9f, 0.2f, 0, 0.2f});
  CHECK(r.labels == LabelVolume(Shape3{1, 1, 5}, {1, 1, 1, 2, 2}));

  // Two untouched voxels pointing at each other form their own basin.
  AffinityVolume pair(Shape3{1, 1, 4});
  pair.set(2, 0, 0, 0, 0.3f);
  pair.set(2, 0, 0, 1, 0.6f);
  pair.set(2, 0, 0, 2, 0.1f);
  const auto p = zwatershed(pair, WatershedParams{0.9f, 0.2f, 0, 0.2f});
  CHECK(p.labels == LabelVolume(Shape3{1, 1, 4}, {1, 1, 1, 0}));
}

TEST_CASE("steepest ascent ties prefer the lower channel, then the lower neighbour") {
  // Centre voxel of a 1x1x3 chain with equal x-affinities joins its left side.
  AffinityVolume aff(Shape3{1, 1, 3});
  aff.set(2, 0, 0, 0, 0.5f);
  aff.set(2, 0, 0, 1, 0.5f);
  const auto r = zwatershed(aff, WatershedParams{0.9f, 0.2f, 0, 0.2f});
  // v0 and v2 both point at v1 (their only edge), v1 points at v0: one basin.
  CHECK(r.labels == LabelVolume(Shape3{1, 1, 3}, {1, 1, 1}));

  // y beats x at equal affinity: v(0,0,1) has a y-edge and an x-edge of 0.5.
  AffinityVolume grid(Shape3{1, 2, 2});
  grid.set(2, 0, 0, 0, 0.5f);  // (0,0)-(0,1)
  grid.set(1, 0, 0, 1, 0.5f);  // (0,1)-(1,1)
  grid.set(2, 0, 1, 0, 0.95f);  // (1,0)-(1,1)
  grid.set(1, 0, 0, 0, 0.1f);  // (0,0)-(1,0)
  const auto g = zwatershed(grid, WatershedParams{0.9f, 0.2f, 0, 0.2f});
  // (0,1) follows y to (1,1); (0,0) follows x to (0,1); everything joins one basin.
  CHECK(count_segments(g.labels) == 1);
}

TEST_CASE("size_filter edge cases") {
  const LabelVolume labels(Shape3{1, 1, 4}, {5, 5, 9, 9});
  CHECK(size_filter(labels, chain4(), 0, 0.5f) == labels);
  CHECK(size_filter(labels, chain4(), 3, 0.25f) == LabelVolume(Shape3{1, 1, 4}, {1, 1, 1, 1}));

  const LabelVolume lone(Shape3{1, 1, 3}, {0, 4, 0});
  CHECK(size_filter(lone, AffinityVolume(Shape3{1, 1, 3}), 2, 0.0f) == LabelVolume(Shape3{1, 1, 3}, 0));
  CHECK_THROWS_AS(size_filter(lone, chain4(), 2, 0.1f), Error);
}

TEST_CASE("size filter merges small segments in decreasing boundary order") {
  // Segments A(1) B(2) C(1): B-A boundary 0.6, B-C boundary 0.7. C merges into B
  // first (0.7), then A (size 1) merges across 0.6.
  AffinityVolume aff(Shape3{1, 1, 4});
  aff.set(2, 0, 0, 0, 0.6f);
  aff.set(2, 0, 0, 1, 1.0f);
  aff.set(2, 0, 0, 2, 0.7f);
  const LabelVolume labels(Shape3{1, 1, 4}, {1, 2, 2, 3});
  CHECK(size_filter(labels, aff, 2, 0.65f) == LabelVolume(Shape3{1, 1, 4}, {0, 1, 1, 1}));
  CHECK(size_filter(labels, aff, 2, 0.5f) == LabelVolume(Shape3{1, 1, 4}, {1, 1, 1, 1}));
}

TEST_CASE("perfect affinities recover ground-truth components") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Shape3 s{8, 16, 16};
    const LabelVolume gt = synth_labels(s, SynthParams{10, 3.0, seed});
    const auto r = zwatershed(affinities_from_labels(gt), WatershedParams{0.5f, 0.2f, 0, 0.3f});
    CHECK(same_partition(r.labels, connected_components(gt)));
  }
}

TEST_CASE("segments are connected and output is dense") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape3 s{4, 6, 6};
    const AffinityVolume aff = random_affinities(s, rng);
    const auto r = zwatershed(aff, WatershedParams{0.8f, 0.3f, 4, 0.5f});
    CHECK(segments_connected(r.labels));
    CHECK(r.labels == relabel_dense(r.labels));
    std::uint64_t total = 0;
    for (const auto n : r.stats.sizes) total += n;
    CHECK(total == s.voxels());
    for (std::size_t k = 1; k < r.stats.sizes.size(); ++k) CHECK(r.stats.sizes[k] >= 4);
  }
}

TEST_CASE("lowering t_high never increases the fragment count") {
  // Fragments = segments plus background voxels (each unassigned voxel is its
  // own fragment); with t_low = t_merge = t_high and no size filter the
  // output is the connected components of edges >= t_high.
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape3 s{3, 5, 5};
    const AffinityVolume aff = random_affinities(s, rng);
    std::uint64_t previous = std::numeric_limits<std::uint64_t>::max();
    for (float t = 1.0f; t >= 0.0f; t -= 0.1f) {
      const auto r = zwatershed(aff, WatershedParams{t, t, 0, t});
      const std::uint64_t fragments = r.stats.segments() + r.stats.background();
      CHECK(fragments <= previous);
      previous = fragments;
    }
  }
}

TEST_CASE("output does not depend on the thread count") {
  std::mt19937_64 rng(4);
  const Shape3 s{9, 12, 12};
  const AffinityVolume aff = random_affinities(s, rng);
  const WatershedParams p{0.85f, 0.3f, 5, 0.4f};
  set_max_threads(1);
  const auto one = zwatershed(aff, p);
  set_max_threads(8);
  const auto eight = zwatershed(aff, p);
  set_max_threads(1);
  CHECK(one.labels == eight.labels);
}
