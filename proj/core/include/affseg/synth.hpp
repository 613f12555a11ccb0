#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "affseg/volume.hpp"

namespace affseg {

/// Portable random draws on top of std::mt19937_64. The standard library
/// distributions are implementation-defined, so every draw used by the
/// generators is defined here.
class Rng {
 public:
  /// Streams derived from one seed are independent engines seeded with
  /// splitmix64(seed + stream * golden-ratio increment).
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller, cosine branch only (two uniforms per draw).
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

inline constexpr std::uint64_t kSeedStream = 1;
inline constexpr std::uint64_t kJitterStream = 2;
inline constexpr std::uint64_t kNoiseStream = 3;

struct SynthParams {
  std::uint64_t n_seeds = 12;
  /// Scale applied to z distances; >= 1 makes cells thin along z.
  double anisotropy = 3.0;
  std::uint64_t rng_seed = 1;
};

struct NoiseParams {
  double flip_sigma = 0.0;
  double jitter_prob = 0.0;
  std::uint64_t rng_seed = 1;
};

/// Per-section (dy, dx) shift applied to section z when comparing it with
/// section z - 1.
using SectionShift = std::pair<int, int>;

/// Nearest-seed labeling under d^2 = dx^2 + dy^2 + (anisotropy * dz)^2; ties go
/// to the lower seed index; seed i gets label i + 1.
LabelVolume voronoi_labels(const Shape3& shape, const std::vector<Voxel>& seeds, double anisotropy);

/// Distinct seed voxels drawn from the seed stream (Floyd's sampling).
std::vector<Voxel> draw_seeds(const Shape3& shape, const SynthParams& p);

/// Throws TooManySeeds when n_seeds is 0 or exceeds the voxel count, and
/// InvalidArgument when anisotropy < 1.
LabelVolume synth_labels(const Shape3& shape, const SynthParams& p);

/// Shifts drawn from the jitter stream: one uniform per section, plus one
/// direction draw (+x, -x, +y, -y) for sections that jitter.
std::vector<SectionShift> draw_section_shifts(std::uint64_t sections, const NoiseParams& n);

/// Noiseless encoding with misaligned sections: y/x edges are 1 for equal
/// nonzero labels; the z edge of (z, y, x) compares against the voxel of
/// section z + 1 displaced by that section's shift (clamped to the volume).
AffinityVolume encode_affinities(const LabelVolume& labels, const std::vector<SectionShift>& shifts);

/// Adds N(0, sigma^2) to every in-bounds slot in storage order, then clamps.
AffinityVolume add_noise(const AffinityVolume& aff, double sigma, std::uint64_t rng_seed);

AffinityVolume synth_affinities(const LabelVolume& labels, const NoiseParams& n);

}  // namespace affseg
