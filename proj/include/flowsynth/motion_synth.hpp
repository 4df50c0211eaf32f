#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "flowsynth/core.hpp"

namespace flowsynth {

/// Deterministic random stream keyed by (global seed, sample id).
///
/// The stream seed is a splitmix64 mix of the global seed and the FNV-1a
/// hash of the sample id, fed to std::mt19937_64 (whose output sequence is
/// fixed by the standard). Reals and indices are derived from raw 64-bit
/// words without std:: distributions, so draws are identical on every
/// standard library.
class RngStream {
public:
    RngStream(std::uint64_t global_seed, std::string_view sample_id);

    /// Seed recorded in manifests; reconstructs the stream with `from_seed`.
    std::uint64_t seed() const noexcept { return seed_; }
    static RngStream from_seed(std::uint64_t seed);

    std::uint64_t next_u64() { return engine_(); }
    /// [0, 1) with 53 random bits.
    double uniform01();
    /// [lo, hi]
    double uniform(double lo, double hi);
    bool bernoulli();
    /// Uniform integer in [0, n), rejection sampled.
    std::uint64_t index(std::uint64_t n);

private:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct DrawOptions {
    float alpha_min = 0.0f;
};

/// Draw order is frozen: r_x, s_x, alpha_x, r_y, s_y, alpha_y.
SynthParams draw_params(RngStream &rng, const DrawOptions &options = {});
SynthParams draw_params(std::uint64_t global_seed, std::string_view sample_id, const DrawOptions &options = {});

struct NormalizedDepth {
    DepthMap depth;
    bool degenerate = false; ///< input was constant; output is uniformly 0.5
};

/// Min-max normalization into [0, 1].
NormalizedDepth normalize_depth(const DepthMap &raw);

/// r = false: 2D - 1, r = true: 1 - 2D.
MotionPlane reverse_depth(const DepthMap &normalized, bool reverse);
/// Adds `shift` to every value of an m1 plane.
MotionPlane shift_motion(const MotionPlane &m1, float shift);
/// Multiplies an m2 plane by `scale`.
MotionPlane scale_motion(const MotionPlane &m2, float scale);

MotionPlane synthesize_axis(const DepthMap &normalized, const AxisParams &axis);
/// Both axes run reverse -> shift -> scale with their own parameters.
MotionField synthesize_motion(const DepthMap &normalized, const SynthParams &params);

} // namespace flowsynth
