#include "flowsynth/core.hpp"

#include <algorithm>
#include <cmath>

namespace flowsynth {
namespace {

void require_finite(std::span<const float> values, const char *what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw InvariantError(std::string(what) + " holds a non-finite value at index " + std::to_string(i));
        }
    }
}

void require_within(std::span<const float> values, float lo, float hi, const char *what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < lo - kRangeTolerance || values[i] > hi + kRangeTolerance) {
            throw InvariantError(std::string(what) + " value " + std::to_string(values[i]) + " at index " +
                                 std::to_string(i) + " is outside [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
        }
    }
}

float max_abs(std::span<const float> values) {
    float m = 0.0f;
    for (float x : values) m = std::max(m, std::fabs(x));
    return m;
}

void check_stage_range(std::span<const float> values, MotionStage stage) {
    switch (stage) {
    case MotionStage::raw:
        break;
    case MotionStage::m1:
    case MotionStage::normalized:
        require_within(values, -1.0f, 1.0f, to_string(stage));
        break;
    case MotionStage::m2:
    case MotionStage::m3:
        require_within(values, -2.0f, 2.0f, to_string(stage));
        break;
    }
}

} // namespace

DepthMap::DepthMap(Plane<float> values, DepthState state) : values_(std::move(values)), state_(state) {
    const auto v = values_.values();
    require_finite(v, "depth map");
    if (state_ == DepthState::normalized) {
        require_within(v, 0.0f, 1.0f, "normalized depth");
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        if (*lo != *hi && (std::fabs(*lo) > kRangeTolerance || std::fabs(*hi - 1.0f) > kRangeTolerance)) {
            throw InvariantError("normalized depth must span [0, 1] unless constant");
        }
    }
}

const char *to_string(MotionStage stage) noexcept {
    switch (stage) {
    case MotionStage::raw: return "raw";
    case MotionStage::m1: return "m1";
    case MotionStage::m2: return "m2";
    case MotionStage::m3: return "m3";
    case MotionStage::normalized: return "normalized";
    }
    return "?";
}

MotionPlane::MotionPlane(Plane<float> values, MotionStage stage) : values_(std::move(values)), stage_(stage) {
    require_finite(values_.values(), "motion plane");
    if (stage_ == MotionStage::normalized) {
        throw InvariantError("a single motion plane cannot be tagged normalized; normalization spans both axes");
    }
    check_stage_range(values_.values(), stage_);
}

MotionField::MotionField(Plane<float> u, Plane<float> v, MotionStage stage)
    : u_(std::move(u)), v_(std::move(v)), stage_(stage) {
    if (!dims_match(u_, v_)) throw InvariantError("motion field u and v planes differ in size");
    require_finite(u_.values(), "motion field u");
    require_finite(v_.values(), "motion field v");
    check_stage_range(u_.values(), stage_);
    check_stage_range(v_.values(), stage_);
    if (stage_ == MotionStage::normalized) {
        const float m = max_abs_component();
        if (m != 0.0f && std::fabs(m - 1.0f) > kRangeTolerance) {
            throw InvariantError("normalized motion field has max component " + std::to_string(m) +
                                 ", expected 1 or an all-zero field");
        }
    }
}

MotionField::MotionField(const MotionPlane &u, const MotionPlane &v) : MotionField(u.plane(), v.plane(), u.stage()) {
    if (u.stage() != v.stage()) throw InvariantError("motion planes are at different stages");
}

float MotionField::max_abs_component() const noexcept {
    return std::max(max_abs(u_.values()), max_abs(v_.values()));
}

BinaryMask::BinaryMask(Plane<std::uint8_t> bits) : bits_(std::move(bits)) {
    const auto v = bits_.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] > 1) {
            throw InvariantError("binary mask value " + std::to_string(v[i]) + " at index " + std::to_string(i));
        }
    }
}

std::size_t BinaryMask::count() const noexcept {
    const auto v = bits_.values();
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), std::uint8_t{1}));
}

SaliencyMap::SaliencyMap(Plane<float> values) : values_(std::move(values)) {
    require_finite(values_.values(), "saliency map");
    require_within(values_.values(), 0.0f, 1.0f, "saliency map");
}

SynthParams::SynthParams(AxisParams x, AxisParams y, std::uint64_t sample_seed)
    : x_(x), y_(y), sample_seed_(sample_seed) {
    for (const auto *axis : {&x_, &y_}) {
        if (!std::isfinite(axis->shift) || axis->shift < -1.0f - kRangeTolerance ||
            axis->shift > 1.0f + kRangeTolerance) {
            throw InvariantError("shift " + std::to_string(axis->shift) + " outside [-1, 1]");
        }
        if (!std::isfinite(axis->scale) || axis->scale < -kRangeTolerance || axis->scale > 1.0f + kRangeTolerance) {
            throw InvariantError("scale " + std::to_string(axis->scale) + " outside [0, 1]");
        }
    }
}

const char *to_string(SampleSource source) noexcept {
    return source == SampleSource::real ? "real" : "synthetic";
}

SampleSource sample_source_from_string(const std::string &text) {
    if (text == "real") return SampleSource::real;
    if (text == "synthetic") return SampleSource::synthetic;
    throw FormatError("unknown sample source '" + text + "'");
}

SampleRecord::SampleRecord(SampleRecordFields fields) : f_(std::move(fields)) {
    if (f_.sample_id.empty()) throw InvariantError("sample record has an empty sample_id");
    if (f_.context_id.empty()) throw InvariantError("sample record " + f_.sample_id + " has an empty context_id");
    if (f_.image.empty() || f_.mask.empty()) {
        throw InvariantError("sample record " + f_.sample_id + " is missing an image or mask path");
    }
    if (!f_.flow_flo && !f_.flow_png) {
        throw InvariantError("sample record " + f_.sample_id + " references no flow file");
    }
    for (const auto *p : {&f_.depth, &f_.flow_flo, &f_.flow_png}) {
        if (*p && (*p)->empty()) throw InvariantError("sample record " + f_.sample_id + " has an empty path");
    }
    if (f_.source == SampleSource::synthetic && !f_.params) {
        throw InvariantError("synthetic record " + f_.sample_id + " lacks synthesis parameters");
    }
    if (f_.source == SampleSource::real && f_.params) {
        throw InvariantError("real record " + f_.sample_id + " carries synthesis parameters");
    }
}

} // namespace flowsynth
