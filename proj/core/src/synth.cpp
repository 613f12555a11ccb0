#include "affseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_set>

#include "affseg/error.hpp"
#include "affseg/parallel.hpp"

namespace affseg {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed + stream * 0x9E3779B97F4A7C15ULL)) {}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

LabelVolume voronoi_labels(const Shape3& shape, const std::vector<Voxel>& seeds, double anisotropy) {
  validate_shape(shape);
  if (seeds.empty()) throw Error(Errc::TooManySeeds, "at least one seed is required");
  LabelVolume labels(shape);
  parallel_for(shape.z, [&](std::size_t z) {
    for (std::uint64_t y = 0; y < shape.y; ++y) {
      for (std::uint64_t x = 0; x < shape.x; ++x) {
        double best = std::numeric_limits<double>::infinity();
        std::uint64_t label = 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
          const double dz = anisotropy * (static_cast<double>(z) - static_cast<double>(seeds[i].z));
          const double dy = static_cast<double>(y) - static_cast<double>(seeds[i].y);
          const double dx = static_cast<double>(x) - static_cast<double>(seeds[i].x);
          const double d2 = dx * dx + dy * dy + dz * dz;
          if (d2 < best) {
            best = d2;
            label = i + 1;
          }
        }
        labels(z, y, x) = label;
      }
    }
  });
  return labels;
}

std::vector<Voxel> draw_seeds(const Shape3& shape, const SynthParams& p) {
  validate_shape(shape);
  const std::uint64_t n = shape.voxels();
  if (p.n_seeds == 0 || p.n_seeds > n) {
    throw Error(Errc::TooManySeeds, std::to_string(p.n_seeds) + " seeds for " + std::to_string(n) + " voxels");
  }
  Rng rng(p.rng_seed, kSeedStream);
  std::unordered_set<std::uint64_t> taken;
  std::vector<Voxel> seeds;
  seeds.reserve(p.n_seeds);
  for (std::uint64_t j = n - p.n_seeds; j < n; ++j) {
    std::uint64_t t = rng.below(j + 1);
    if (taken.contains(t)) t = j;
    taken.insert(t);
    seeds.push_back(unflatten(shape, t));
  }
  return seeds;
}

LabelVolume synth_labels(const Shape3& shape, const SynthParams& p) {
  if (!(p.anisotropy >= 1.0)) throw Error(Errc::InvalidArgument, "anisotropy must be >= 1");
  return voronoi_labels(shape, draw_seeds(shape, p), p.anisotropy);
}

std::vector<SectionShift> draw_section_shifts(std::uint64_t sections, const NoiseParams& n) {
  if (!(n.jitter_prob >= 0.0 && n.jitter_prob <= 1.0)) {
    throw Error(Errc::InvalidArgument, "jitter probability must lie in [0, 1]");
  }
  static constexpr SectionShift kDirections[4] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
  Rng rng(n.rng_seed, kJitterStream);
  std::vector<SectionShift> shifts(sections, {0, 0});
  for (auto& shift : shifts) {
    if (rng.uniform() < n.jitter_prob) shift = kDirections[rng.below(4)];
  }
  return shifts;
}

AffinityVolume encode_affinities(const LabelVolume& labels, const std::vector<SectionShift>& shifts) {
  const Shape3& s = labels.shape();
  if (shifts.size() != s.z) throw Error(Errc::ShapeMismatch, "one shift per z-section is required");
  auto clamp_axis = [](std::uint64_t base, int delta, std::uint64_t len) {
    const auto moved = static_cast<std::int64_t>(base) + delta;
    return static_cast<std::uint64_t>(std::clamp<std::int64_t>(moved, 0, static_cast<std::int64_t>(len) - 1));
  };
  AffinityBuilder b(s);
  for_each_edge(s, [&](int c, std::uint64_t v, std::uint64_t u) {
    std::uint64_t other = u;
    if (c == 0) {
      const Voxel p = unflatten(s, u);
      const auto [dy, dx] = shifts[p.z];
      other = flat_index(s, p.z, clamp_axis(p.y, dy, s.y), clamp_axis(p.x, dx, s.x));
    }
    if (labels[v] != 0 && labels[v] == labels[other]) b.set(c, v, 1.0f);
  });
  return std::move(b).build();
}

AffinityVolume add_noise(const AffinityVolume& aff, double sigma, std::uint64_t rng_seed) {
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidArgument, "noise sigma must be >= 0");
  if (sigma == 0.0) return aff;
  Rng rng(rng_seed, kNoiseStream);
  AffinityBuilder b(aff.shape());
  for_each_edge(aff.shape(), [&](int c, std::uint64_t v, std::uint64_t) {
    const double noisy = static_cast<double>(aff.get(c, v)) + sigma * rng.normal();
    b.set(c, v, static_cast<float>(std::clamp(noisy, 0.0, 1.0)));
  });
  return std::move(b).build();
}

AffinityVolume synth_affinities(const LabelVolume& labels, const NoiseParams& n) {
  const auto shifts = draw_section_shifts(labels.shape().z, n);
  return add_noise(encode_affinities(labels, shifts), n.flip_sigma, n.rng_seed);
}

}  // namespace affseg
