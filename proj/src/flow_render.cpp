#include "flowsynth/flow_render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowsynth/motion_synth.hpp"

namespace flowsynth {
namespace {

constexpr float kDegenerateFlow = 1e-12f;

std::array<Rgb8, ColorWheel::kSize> build_wheel() {
    std::array<Rgb8, ColorWheel::kSize> wheel{};
    int k = 0;
    auto ramp = [](int i, int n) { return static_cast<std::uint8_t>(255 * i / n); };
    auto fall = [](int i, int n) { return static_cast<std::uint8_t>(255 - 255 * i / n); };
    for (int i = 0; i < ColorWheel::kRY; ++i) wheel[k++] = {255, ramp(i, ColorWheel::kRY), 0};
    for (int i = 0; i < ColorWheel::kYG; ++i) wheel[k++] = {fall(i, ColorWheel::kYG), 255, 0};
    for (int i = 0; i < ColorWheel::kGC; ++i) wheel[k++] = {0, 255, ramp(i, ColorWheel::kGC)};
    for (int i = 0; i < ColorWheel::kCB; ++i) wheel[k++] = {0, fall(i, ColorWheel::kCB), 255};
    for (int i = 0; i < ColorWheel::kBM; ++i) wheel[k++] = {ramp(i, ColorWheel::kBM), 0, 255};
    for (int i = 0; i < ColorWheel::kMR; ++i) wheel[k++] = {255, 0, fall(i, ColorWheel::kMR)};
    return wheel;
}

std::uint8_t to_channel(float value) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * value), 0L, 255L));
}

} // namespace

const std::array<Rgb8, ColorWheel::kSize> &ColorWheel::anchors() {
    static const auto wheel = build_wheel();
    return wheel;
}

NormalizedFlow normalize_flow(const MotionField &motion) {
    const float peak = motion.max_abs_component();
    if (peak < kDegenerateFlow) {
        return {MotionField(Plane<float>(motion.width(), motion.height(), 0.0f),
                            Plane<float>(motion.width(), motion.height(), 0.0f), MotionStage::normalized),
                true};
    }
    Plane<float> u = motion.u();
    Plane<float> v = motion.v();
    for (float &x : u.values()) x /= peak;
    for (float &x : v.values()) x /= peak;
    return {MotionField(std::move(u), std::move(v), MotionStage::normalized), false};
}

Rgb8 flow_color(float u, float v) {
    // Mixed float/double arithmetic follows the Middlebury computeColor
    // reference so renders agree with it bit for bit.
    const auto &wheel = ColorWheel::anchors();
    const float radius = std::min(std::sqrt(u * u + v * v), 1.0f);
    const float angle = static_cast<float>(std::atan2(-static_cast<double>(v), -static_cast<double>(u)) / std::numbers::pi);
    const float position = static_cast<float>((angle + 1.0) / 2.0 * (ColorWheel::kSize - 1));
    const int k0 = static_cast<int>(position);
    const int k1 = (k0 + 1) % ColorWheel::kSize;
    const float frac = position - static_cast<float>(k0);

    auto channel = [&](std::uint8_t Rgb8::*member) {
        const auto c0 = static_cast<float>(wheel[static_cast<std::size_t>(k0)].*member / 255.0);
        const auto c1 = static_cast<float>(wheel[static_cast<std::size_t>(k1)].*member / 255.0);
        const float hue = (1.0f - frac) * c0 + frac * c1;
        return to_channel(1.0f - radius * (1.0f - hue));
    };
    return {channel(&Rgb8::r), channel(&Rgb8::g), channel(&Rgb8::b)};
}

FlowRgb uv_to_rgb(const MotionField &normalized) {
    const float peak = normalized.max_abs_component();
    if (peak > 1.0f + kUnitRadiusSlack) {
        throw ContractError("uv_to_rgb needs a normalized field, max component is " + std::to_string(peak));
    }
    Plane<Rgb8> pixels(normalized.width(), normalized.height());
    const auto u = normalized.u().values();
    const auto v = normalized.v().values();
    auto out = pixels.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = flow_color(u[i], v[i]);
    return FlowRgb(std::move(pixels));
}

RenderResult render_pipeline(const DepthMap &raw_depth, const SynthParams &params) {
    const NormalizedDepth depth = normalize_depth(raw_depth);
    NormalizedFlow flow = normalize_flow(synthesize_motion(depth.depth, params));
    FlowRgb rgb = uv_to_rgb(flow.field);
    return {std::move(flow.field), std::move(rgb), depth.degenerate, flow.degenerate};
}

RgbImage depth_to_rgb(const DepthMap &depth) {
    const NormalizedDepth n = normalize_depth(depth);
    Plane<Rgb8> pixels(depth.width(), depth.height());
    const auto src = n.depth.plane().values();
    auto dst = pixels.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const std::uint8_t g = to_channel(src[i]);
        dst[i] = {g, g, g};
    }
    return RgbImage(std::move(pixels));
}

} // namespace flowsynth
