#include "flowsynth/motion_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowsynth {
namespace {

constexpr double kDegenerateSpan = 1e-12;

void require_stage(const MotionPlane &plane, MotionStage expected, const char *op) {
    if (plane.stage() != expected) {
        throw ContractError(std::string(op) + " expects a " + to_string(expected) + " plane, got " +
                            to_string(plane.stage()));
    }
}

void require_normalized(const DepthMap &depth, const char *op) {
    if (depth.state() != DepthState::normalized) throw ContractError(std::string(op) + " expects a normalized depth map");
}

} // namespace

std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t global_seed, std::string_view sample_id)
    : RngStream(splitmix64(splitmix64(global_seed) ^ fnv1a64(sample_id))) {}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RngStream RngStream::from_seed(std::uint64_t seed) { return RngStream(seed); }

double RngStream::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) {
    // 53-bit lattice including both endpoints
    const double t = static_cast<double>(engine_() >> 11) / static_cast<double>((1ULL << 53) - 1);
    return lo + (hi - lo) * t;
}

bool RngStream::bernoulli() { return (engine_() >> 63) != 0; }

std::uint64_t RngStream::index(std::uint64_t n) {
    if (n == 0) throw ContractError("RngStream::index needs n > 0");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

SynthParams draw_params(RngStream &rng, const DrawOptions &options) {
    if (!(options.alpha_min >= 0.0f && options.alpha_min <= 1.0f)) {
        throw ContractError("alpha_min must lie in [0, 1], got " + std::to_string(options.alpha_min));
    }
    auto axis = [&] {
        AxisParams a;
        a.reverse = rng.bernoulli();
        a.shift = static_cast<float>(rng.uniform(-1.0, 1.0));
        a.scale = static_cast<float>(rng.uniform(options.alpha_min, 1.0));
        return a;
    };
    const AxisParams x = axis();
    const AxisParams y = axis();
    return SynthParams(x, y, rng.seed());
}

SynthParams draw_params(std::uint64_t global_seed, std::string_view sample_id, const DrawOptions &options) {
    RngStream rng(global_seed, sample_id);
    return draw_params(rng, options);
}

NormalizedDepth normalize_depth(const DepthMap &raw) {
    const auto in = raw.plane().values();
    const auto [lo_it, hi_it] = std::minmax_element(in.begin(), in.end());
    const double lo = *lo_it;
    const double span = static_cast<double>(*hi_it) - lo;
    Plane<float> out(raw.width(), raw.height());
    auto dst = out.values();
    if (span < kDegenerateSpan) {
        std::fill(dst.begin(), dst.end(), 0.5f);
        return {DepthMap(std::move(out), DepthState::normalized), true};
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
        dst[i] = static_cast<float>((static_cast<double>(in[i]) - lo) / span);
    }
    return {DepthMap(std::move(out), DepthState::normalized), false};
}

MotionPlane reverse_depth(const DepthMap &normalized, bool reverse) {
    require_normalized(normalized, "reverse_depth");
    const auto in = normalized.plane().values();
    Plane<float> out(normalized.width(), normalized.height());
    auto dst = out.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        dst[i] = reverse ? 1.0f - 2.0f * in[i] : 2.0f * in[i] - 1.0f;
    }
    return MotionPlane(std::move(out), MotionStage::m1);
}

MotionPlane shift_motion(const MotionPlane &m1, float shift) {
    require_stage(m1, MotionStage::m1, "shift_motion");
    if (!(shift >= -1.0f - kRangeTolerance && shift <= 1.0f + kRangeTolerance)) {
        throw ContractError("shift must lie in [-1, 1], got " + std::to_string(shift));
    }
    Plane<float> out = m1.plane();
    for (float &v : out.values()) v += shift;
    return MotionPlane(std::move(out), MotionStage::m2);
}

MotionPlane scale_motion(const MotionPlane &m2, float scale) {
    require_stage(m2, MotionStage::m2, "scale_motion");
    if (!(scale >= -kRangeTolerance && scale <= 1.0f + kRangeTolerance)) {
        throw ContractError("scale must lie in [0, 1], got " + std::to_string(scale));
    }
    Plane<float> out = m2.plane();
    for (float &v : out.values()) v *= scale;
    const auto src = m2.plane().values();
    const auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (std::fabs(dst[i]) > std::fabs(src[i]) + kRangeTolerance) {
            throw InvariantError("scaled motion exceeds its source magnitude at index " + std::to_string(i));
        }
    }
    return MotionPlane(std::move(out), MotionStage::m3);
}

MotionPlane synthesize_axis(const DepthMap &normalized, const AxisParams &axis) {
    return scale_motion(shift_motion(reverse_depth(normalized, axis.reverse), axis.shift), axis.scale);
}

MotionField synthesize_motion(const DepthMap &normalized, const SynthParams &params) {
    require_normalized(normalized, "synthesize_motion");
    return MotionField(synthesize_axis(normalized, params.x()), synthesize_axis(normalized, params.y()));
}

} // namespace flowsynth
