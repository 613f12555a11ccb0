#include <numeric>
#include <random>

#include "affseg/error.hpp"
#include "affseg/malis.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace affseg;

namespace {

// 1x1x3 chain with x-affinities (0.9, 0.4).
AffinityVolume chain3() {
  AffinityVolume aff(Shape3{1, 1, 3});
  aff.set(2, 0, 0, 0, 0.9f);
  aff.set(2, 0, 0, 1, 0.4f);
  return aff;
}

LabelVolume random_labels(const Shape3& s, std::mt19937_64& rng, std::uint64_t max_label) {
  LabelVolume gt(s);
  std::uniform_int_distribution<std::uint64_t> pick(0, max_label);
  for (auto& id : gt.data()) id = pick(rng);
  return gt;
}

Shape3 random_small_shape(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> dim(1, 3);
  Shape3 s{dim(rng), dim(rng), dim(rng)};
  if (s.voxels() == 1) s.x = 2;
  return s;
}

}  // namespace

TEST_CASE("maximin affinity on a chain takes the weakest link") {
  CHECK(maximin_affinity(chain3(), Voxel{0, 0, 0}, Voxel{0, 0, 2}) == doctest::Approx(0.4));
}

TEST_CASE("maximin prefers a detour over a weak direct edge") {
  AffinityVolume aff(Shape3{1, 2, 2});
  aff.set(2, 0, 0, 0, 0.2f);  // v00 - v01
  aff.set(2, 0, 1, 0, 0.7f);  // v10 - v11
  aff.set(1, 0, 0, 0, 0.6f);  // v00 - v10
  aff.set(1, 0, 0, 1, 0.5f);  // v01 - v11
  // Enumerating both simple paths gives max(0.2, min(0.6, 0.7, 0.5)) = 0.5.
  CHECK(oracle::maximin_by_paths(aff, 0, 1) == doctest::Approx(0.5));
  CHECK(maximin_affinity(aff, Voxel{0, 0, 0}, Voxel{0, 0, 1}) == 0.5f);
}

TEST_CASE("maximin rejects equal or out-of-bounds endpoints") {
  CHECK_THROWS_AS(maximin_affinity(chain3(), Voxel{0, 0, 1}, Voxel{0, 0, 1}), Error);
  CHECK_THROWS_AS(maximin_affinity(chain3(), Voxel{0, 0, 0}, Voxel{0, 0, 3}), Error);
}

TEST_CASE("maximin matches widest-path search on random volumes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (int trial = 0; trial < 40; ++trial) {
    const Shape3 s = random_small_shape(rng);
    AffinityBuilder b(s);
    for_each_edge(s, [&](int c, std::uint64_t v, std::uint64_t) { b.set(c, v, unit(rng)); });
    const AffinityVolume aff = std::move(b).build();
    const auto widest = oracle::widest_from(aff, 0);
    for (std::uint64_t v = 1; v < s.voxels(); ++v) {
      CHECK(maximin_affinity(aff, Voxel{0, 0, 0}, unflatten(s, v)) == static_cast<float>(widest[v]));
    }
  }
}

TEST_CASE("edge counts on the three-voxel chain") {
  const LabelVolume gt(Shape3{1, 1, 3}, {1, 1, 2});
  const PairCounts counts = malis_edge_counts(chain3(), gt);
  const auto expected = oracle::malis_counts(chain3(), gt);
  CHECK(counts.pos.values == expected.pos);
  CHECK(counts.neg.values == expected.neg);
  CHECK(counts.pos.at(2, 0) == 1);
  CHECK(counts.pos.at(2, 1) == 0);
  CHECK(counts.neg.at(2, 0) == 0);
  CHECK(counts.neg.at(2, 1) == 2);
}

TEST_CASE("unlabeled and single-label ground truth") {
  std::mt19937_64 rng(3);
  const Shape3 s{2, 3, 3};
  const AffinityVolume aff = oracle::distinct_affinities(s, rng);

  const PairCounts none = malis_edge_counts(aff, LabelVolume(s, 0));
  CHECK(std::accumulate(none.pos.values.begin(), none.pos.values.end(), std::uint64_t{0}) == 0);
  CHECK(std::accumulate(none.neg.values.begin(), none.neg.values.end(), std::uint64_t{0}) == 0);

  const PairCounts one = malis_edge_counts(aff, LabelVolume(s, 5));
  const std::uint64_t n = s.voxels();
  CHECK(std::accumulate(one.neg.values.begin(), one.neg.values.end(), std::uint64_t{0}) == 0);
  CHECK(std::accumulate(one.pos.values.begin(), one.pos.values.end(), std::uint64_t{0}) == n * (n - 1) / 2);

  CHECK_THROWS_AS(malis_edge_counts(aff, LabelVolume(Shape3{1, 1, 2}, 1)), Error);
}

TEST_CASE("edge counts match the per-pair oracle, ties included") {
  std::mt19937_64 rng(2024);
  // Quantized affinities force ties so the tie rule is exercised.
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const Shape3 s = random_small_shape(rng);
    AffinityBuilder b(s);
    for_each_edge(s, [&](int c, std::uint64_t v, std::uint64_t) { b.set(c, v, 0.25f * level(rng)); });
    const AffinityVolume aff = std::move(b).build();
    const LabelVolume gt = random_labels(s, rng, 2);
    const PairCounts counts = malis_edge_counts(aff, gt);
    const auto expected = oracle::malis_counts(aff, gt);
    REQUIRE(counts.pos.values == expected.pos);
    REQUIRE(counts.neg.values == expected.neg);
  }
}

TEST_CASE("counts are conserved and invariant to label permutation") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Shape3 s = random_small_shape(rng);
    const AffinityVolume aff = oracle::distinct_affinities(s, rng);
    const LabelVolume gt = random_labels(s, rng, 2);
    const PairCounts counts = malis_edge_counts(aff, gt);

    std::uint64_t labeled = 0;
    for (const auto id : gt.data()) labeled += id != 0 ? 1 : 0;
    const std::uint64_t total = std::accumulate(counts.pos.values.begin(), counts.pos.values.end(), std::uint64_t{0}) +
                                std::accumulate(counts.neg.values.begin(), counts.neg.values.end(), std::uint64_t{0});
    CHECK(total == labeled * (labeled - (labeled > 0 ? 1 : 0)) / 2);

    LabelVolume permuted = gt;
    for (auto& id : permuted.data()) id = id == 0 ? 0 : 100 - id;
    const PairCounts again = malis_edge_counts(aff, permuted);
    CHECK(again.pos == counts.pos);
    CHECK(again.neg == counts.neg);
  }
}

TEST_CASE("gradient of the chain example") {
  const LabelVolume gt(Shape3{1, 1, 3}, {1, 1, 2});
  const MalisResult r = malis_gradient(chain3(), gt, false);
  CHECK(r.gradient.at(2, 0) == doctest::Approx(-0.2).epsilon(1e-6));
  CHECK(r.gradient.at(2, 1) == doctest::Approx(1.6).epsilon(1e-6));
  CHECK(r.loss == doctest::Approx(0.33).epsilon(1e-6));

  const MalisResult normalized = malis_gradient(chain3(), gt, true);
  CHECK(normalized.loss == doctest::Approx(0.33 / 3.0).epsilon(1e-6));
  CHECK(normalized.gradient.at(2, 1) == doctest::Approx(1.6 / 3.0).epsilon(1e-6));
}

TEST_CASE("perfect affinities and empty ground truth give zero loss") {
  const Shape3 s{2, 2, 3};
  LabelVolume gt(s);
  for (std::uint64_t i = 0; i < gt.size(); ++i) gt[i] = 1 + (unflatten(s, i).x >= 1 ? 1 : 0);
  const MalisResult perfect = malis_gradient(affinities_from_labels(gt), gt, false);
  CHECK(perfect.loss == 0.0);
  for (const float g : perfect.gradient.values) CHECK(g == 0.0f);

  std::mt19937_64 rng(5);
  const MalisResult empty = malis_gradient(oracle::distinct_affinities(s, rng), LabelVolume(s, 0), true);
  CHECK(empty.loss == 0.0);
  for (const float g : empty.gradient.values) CHECK(g == 0.0f);
}

TEST_CASE("gradient matches central finite differences away from ties") {
  std::mt19937_64 rng(17);
  const Shape3 s{2, 3, 3};
  for (int trial = 0; trial < 10; ++trial) {
    const AffinityVolume aff = oracle::distinct_affinities(s, rng);
    const LabelVolume gt = random_labels(s, rng, 2);
    const MalisResult analytic = malis_gradient(aff, gt, false);
    for_each_edge(s, [&](int c, std::uint64_t v, std::uint64_t) {
      const std::uint64_t slot = c * s.voxels() + v;
      std::vector<float> plus(aff.data().begin(), aff.data().end());
      std::vector<float> minus = plus;
      plus[slot] += 1e-3f;
      minus[slot] -= 1e-3f;
      const double step = static_cast<double>(plus[slot]) - static_cast<double>(minus[slot]);
      const double fd = (malis_gradient(AffinityVolume(s, plus), gt, false).loss -
                         malis_gradient(AffinityVolume(s, minus), gt, false).loss) /
                        step;
      CHECK(std::abs(fd - analytic.gradient.values[slot]) <= 1e-4);
    });
  }
}
