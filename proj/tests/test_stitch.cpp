#include <filesystem>
#include <functional>
#include <random>

#include "affseg/error.hpp"
#include "affseg/parallel.hpp"
#include "affseg/stitch.hpp"
#include "affseg/synth.hpp"
#include "doctest.h"

using namespace affseg;

namespace {

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::IoFailure;
}

std::vector<LabelVolume> crop_all(const LabelVolume& labels, const std::vector<BlockSpec>& specs) {
  std::vector<LabelVolume> out;
  for (const auto& spec : specs) out.push_back(crop(labels, spec.halo));
  return out;
}

}  // namespace

TEST_CASE("one-axis partition with halo") {
  const auto specs = partition_blocks(Shape3{1, 1, 10}, Shape3{1, 1, 6}, Shape3{0, 0, 2});
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].core.axes[2] == Range{0, 6});
  CHECK(specs[0].halo.axes[2] == Range{0, 8});
  CHECK(specs[1].core.axes[2] == Range{6, 10});
  CHECK(specs[1].halo.axes[2] == Range{4, 10});
  CHECK(specs[1].id == 1);
}

TEST_CASE("partition covers the volume exactly once, z-major") {
  const Shape3 s{7, 5, 9};
  const auto specs = partition_blocks(s, Shape3{3, 5, 4}, Shape3{1, 0, 2});
  CHECK(specs.size() == 3 * 1 * 3);
  std::vector<int> hits(s.voxels(), 0);
  for (const auto& spec : specs) {
    for (std::uint64_t z = spec.core.axes[0].begin; z < spec.core.axes[0].end; ++z) {
      for (std::uint64_t y = spec.core.axes[1].begin; y < spec.core.axes[1].end; ++y) {
        for (std::uint64_t x = spec.core.axes[2].begin; x < spec.core.axes[2].end; ++x) ++hits[flat_index(s, z, y, x)];
      }
    }
  }
  for (const int h : hits) CHECK(h == 1);
  CHECK(specs[1].core.axes[2].begin == 4);
  CHECK(specs[3].core.axes[0].begin == 3);

  const auto single = partition_blocks(s, s, Shape3{0, 0, 0});
  REQUIRE(single.size() == 1);
  CHECK(single[0].core == full_box(s));
  CHECK(single[0].halo == full_box(s));
}

TEST_CASE("invalid partitions") {
  CHECK(error_of([] { partition_blocks(Shape3{4, 4, 4}, Shape3{2, 4, 4}, Shape3{0, 1, 1}); }) ==
        Errc::InvalidPartition);
  CHECK(error_of([] { partition_blocks(Shape3{4, 4, 4}, Shape3{0, 4, 4}, Shape3{1, 1, 1}); }) ==
        Errc::InvalidPartition);
}

TEST_CASE("blocks fully overlapping one label stitch to one segment") {
  const Shape3 s{1, 1, 10};
  const auto specs = partition_blocks(s, Shape3{1, 1, 6}, Shape3{0, 0, 2});
  const std::vector<LabelVolume> blocks{LabelVolume(Shape3{1, 1, 8}, 3), LabelVolume(Shape3{1, 1, 6}, 8)};
  CHECK(stitch(specs, blocks, StitchParams{}) == LabelVolume(s, 1));
}

TEST_CASE("overlap thresholds") {
  const Shape3 s{1, 1, 10};
  const auto specs = partition_blocks(s, Shape3{1, 1, 6}, Shape3{0, 0, 2});
  // Shared region is x in [4, 8). Block 0: label 1 on x < 7, label 2 on x = 7.
  // Block 1: label 5 on x >= 6. Each block-0 label overlaps label 5 in one voxel.
  const LabelVolume a(Shape3{1, 1, 8}, {1, 1, 1, 1, 1, 1, 1, 2});
  const LabelVolume b(Shape3{1, 1, 6}, {0, 0, 5, 5, 5, 5});
  const auto graph = stitch_graph(specs, {a, b});
  REQUIRE(graph.size() == 2);
  CHECK(graph[0].a.label == 1);
  CHECK(graph[0].overlap == 1);
  CHECK(graph[0].count_a == 3);
  CHECK(graph[0].count_b == 2);
  CHECK(graph[1].a.label == 2);
  CHECK(graph[1].overlap == 1);
  CHECK(graph[1].count_a == 1);

  CHECK(stitch(specs, {a, b}, StitchParams{0.5, 1}) == LabelVolume(s, 1));
  // min_voxels = 2 keeps the one-voxel overlaps apart.
  CHECK(stitch(specs, {a, b}, StitchParams{0.5, 2}) == LabelVolume(s, {1, 1, 1, 1, 1, 1, 2, 2, 2, 2}));
  // A stricter ratio rejects the 1-of-2 overlap but not the 1-of-1 one.
  CHECK(stitch(specs, {a, b}, StitchParams{0.75, 1}) == LabelVolume(s, {1, 1, 1, 1, 1, 1, 2, 2, 2, 2}));

  // No overlap at all: distinct global segments.
  const LabelVolume c(Shape3{1, 1, 6}, {0, 0, 0, 0, 4, 4});
  const LabelVolume d(Shape3{1, 1, 8}, {1, 1, 1, 1, 1, 1, 0, 0});
  CHECK(stitch(specs, {d, c}, StitchParams{}) == LabelVolume(s, {1, 1, 1, 1, 1, 1, 0, 0, 2, 2}));
}

TEST_CASE("coverage and parameter errors") {
  const Shape3 s{1, 1, 10};
  const auto specs = partition_blocks(s, Shape3{1, 1, 6}, Shape3{0, 0, 2});
  const LabelVolume a(Shape3{1, 1, 8}, 1);
  CHECK(error_of([&] { stitch(specs, {a}, StitchParams{}); }) == Errc::CoverageGap);
  CHECK(error_of([&] { stitch(specs, {a, LabelVolume{}}, StitchParams{}); }) == Errc::CoverageGap);
  CHECK(error_of([&] { stitch(specs, {a, LabelVolume(Shape3{1, 1, 5}, 1)}, StitchParams{}); }) ==
        Errc::ShapeMismatch);
  CHECK(error_of([&] { stitch(specs, {a, LabelVolume(Shape3{1, 1, 6}, 1)}, StitchParams{0.0, 2}); }) ==
        Errc::InvalidArgument);

  auto gap = specs;
  gap[1].core.axes[2].begin = 7;
  CHECK(error_of([&] { stitch(gap, {a, LabelVolume(Shape3{1, 1, 6}, 1)}, StitchParams{}); }) == Errc::CoverageGap);
  auto overlap = specs;
  overlap[1].core.axes[2].begin = 5;
  CHECK(error_of([&] { stitch(overlap, {a, LabelVolume(Shape3{1, 1, 6}, 1)}, StitchParams{}); }) ==
        Errc::InvalidPartition);
}

TEST_CASE("stitching is invariant to block-local renumbering") {
  const Shape3 s{8, 12, 12};
  const LabelVolume gt = synth_labels(s, SynthParams{10, 2.0, 5});
  const auto specs = partition_blocks(s, Shape3{4, 6, 6}, Shape3{2, 2, 2});
  auto blocks = crop_all(gt, specs);
  const LabelVolume first = stitch(specs, blocks, StitchParams{});
  std::mt19937_64 rng(1);
  for (auto& block : blocks) {
    const std::uint64_t salt = 1 + rng() % 1000;
    for (auto& id : block.data()) id = id == 0 ? 0 : id * 7919 + salt;
  }
  CHECK(stitch(specs, blocks, StitchParams{}) == first);
  CHECK(same_partition(first, gt));
}

TEST_CASE("blockwise watershed is independent of the thread count") {
  const Shape3 s{8, 12, 12};
  const LabelVolume gt = synth_labels(s, SynthParams{8, 2.0, 9});
  const AffinityVolume aff = synth_affinities(gt, NoiseParams{0.05, 0.0, 2});
  const auto specs = partition_blocks(s, Shape3{4, 6, 6}, Shape3{2, 2, 2});
  const WatershedParams p{0.9f, 0.2f, 4, 0.3f};
  set_max_threads(1);
  const auto one = stitch(specs, segment_blocks(aff, specs, p), StitchParams{});
  set_max_threads(8);
  const auto eight = stitch(specs, segment_blocks(aff, specs, p), StitchParams{});
  set_max_threads(1);
  CHECK(one == eight);
}

TEST_CASE("manifest round trip") {
  Manifest m;
  m.shape = Shape3{4, 4, 10};
  m.blocks = partition_blocks(m.shape, Shape3{4, 4, 6}, Shape3{0, 0, 2});
  m.label_paths = {"block_0.volb", "sub dir/block_1.volb"};
  const Manifest parsed = parse_manifest(format_manifest(m));
  CHECK(parsed.shape == m.shape);
  CHECK(parsed.blocks == m.blocks);
  CHECK(parsed.label_paths == m.label_paths);

  const auto dir = std::filesystem::temp_directory_path() / "affseg_test_manifest";
  std::filesystem::create_directories(dir);
  write_manifest(m, dir / "m.txt");
  const Manifest read = read_manifest(dir / "m.txt");
  CHECK(std::filesystem::path(read.label_paths[0]) == dir / "block_0.volb");
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(parse_manifest("block 0 core 0 1 0 1 0 1 halo 0 1 0 1 0 1 labels a\n"), Error);
  CHECK_THROWS_AS(parse_manifest("shape 1 1 1\nblock 0 core 0 1 0 1 0 2 halo 0 1 0 1 0 2 labels a\n"), Error);
  CHECK_THROWS_AS(parse_manifest("shape 1 1 1\nwhat\n"), Error);
}
