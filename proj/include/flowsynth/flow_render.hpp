#pragma once

#include <array>

#include "flowsynth/core.hpp"

namespace flowsynth {

/// Middlebury flow color wheel: 55 hue anchors built from six linear
/// segments (red-yellow 15, yellow-green 6, green-cyan 4, cyan-blue 11,
/// blue-magenta 13, magenta-red 6).
struct ColorWheel {
    static constexpr int kRY = 15;
    static constexpr int kYG = 6;
    static constexpr int kGC = 4;
    static constexpr int kCB = 11;
    static constexpr int kBM = 13;
    static constexpr int kMR = 6;
    static constexpr int kSize = kRY + kYG + kGC + kCB + kBM + kMR;

    static const std::array<Rgb8, kSize> &anchors();
};

/// Saturation radius beyond which uv_to_rgb refuses its input.
inline constexpr float kUnitRadiusSlack = 1e-3f;

struct NormalizedFlow {
    MotionField field;
    bool degenerate = false; ///< max component was ~0; field is all zeros
};

/// Divides both axes by max(max|u|, max|v|).
NormalizedFlow normalize_flow(const MotionField &motion);

/// Color of a single flow vector with |u|, |v| <= 1.
Rgb8 flow_color(float u, float v);

/// Wheel rendering: angle atan2(-v, -u) picks the hue, the vector radius
/// (clamped to 1) the saturation, 0 renders white.
FlowRgb uv_to_rgb(const MotionField &normalized);

struct RenderResult {
    MotionField flow; ///< normalized field, for .flo persistence
    FlowRgb rgb;
    bool degenerate_depth = false;
    bool degenerate_flow = false;
};

RenderResult render_pipeline(const DepthMap &raw_depth, const SynthParams &params);

/// Gray visualization of a depth map (min-max scaled to 0..255).
RgbImage depth_to_rgb(const DepthMap &depth);

} // namespace flowsynth
