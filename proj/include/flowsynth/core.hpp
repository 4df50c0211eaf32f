#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowsynth/errors.hpp"

namespace flowsynth {

/// Inclusive slack applied to every real-valued range check.
inline constexpr float kRangeTolerance = 1e-6f;

/// Row-major, top-left origin storage shared by every raster type.
template <typename T>
class Plane {
public:
    Plane(int width, int height, T fill = T{}) : Plane(width, height, std::vector<T>(checked_size(width, height), fill)) {}

    Plane(int width, int height, std::vector<T> values) : width_(width), height_(height), values_(std::move(values)) {
        if (values_.size() != checked_size(width, height)) {
            throw InvariantError("plane payload has " + std::to_string(values_.size()) + " values, expected " +
                                 std::to_string(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    const T &operator()(int x, int y) const { return values_[index(x, y)]; }
    T &operator()(int x, int y) { return values_[index(x, y)]; }

    std::span<const T> values() const noexcept { return values_; }
    std::span<T> values() noexcept { return values_; }

    bool operator==(const Plane &) const = default;

private:
    static std::size_t checked_size(int width, int height) {
        if (width <= 0 || height <= 0) {
            throw InvariantError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                                 std::to_string(height));
        }
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<T> values_;
};

/// True iff both rasters share width and height.
template <typename A, typename B>
bool dims_match(const A &a, const B &b) noexcept {
    return a.width() == b.width() && a.height() == b.height();
}

enum class DepthState { raw, normalized };

class DepthMap {
public:
    DepthMap(Plane<float> values, DepthState state);

    int width() const noexcept { return values_.width(); }
    int height() const noexcept { return values_.height(); }
    DepthState state() const noexcept { return state_; }
    const Plane<float> &plane() const noexcept { return values_; }
    float operator()(int x, int y) const { return values_(x, y); }

private:
    Plane<float> values_;
    DepthState state_;
};

/// Pipeline stage of a motion plane or field. `raw` carries no range
/// guarantee and tags fields that come from files.
enum class MotionStage { raw, m1, m2, m3, normalized };

const char *to_string(MotionStage stage) noexcept;

/// One axis of motion at a given stage.
class MotionPlane {
public:
    MotionPlane(Plane<float> values, MotionStage stage);

    int width() const noexcept { return values_.width(); }
    int height() const noexcept { return values_.height(); }
    MotionStage stage() const noexcept { return stage_; }
    const Plane<float> &plane() const noexcept { return values_; }

private:
    Plane<float> values_;
    MotionStage stage_;
};

class MotionField {
public:
    MotionField(Plane<float> u, Plane<float> v, MotionStage stage);
    MotionField(const MotionPlane &u, const MotionPlane &v);

    int width() const noexcept { return u_.width(); }
    int height() const noexcept { return u_.height(); }
    MotionStage stage() const noexcept { return stage_; }
    const Plane<float> &u() const noexcept { return u_; }
    const Plane<float> &v() const noexcept { return v_; }

    /// max(max|u|, max|v|)
    float max_abs_component() const noexcept;

    bool operator==(const MotionField &) const = default;

private:
    Plane<float> u_;
    Plane<float> v_;
    MotionStage stage_;
};

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb8 &) const = default;
};

/// 8-bit RGB raster; holds both photographs and rendered flow.
class RgbImage {
public:
    explicit RgbImage(Plane<Rgb8> pixels) : pixels_(std::move(pixels)) {}

    int width() const noexcept { return pixels_.width(); }
    int height() const noexcept { return pixels_.height(); }
    const Plane<Rgb8> &plane() const noexcept { return pixels_; }
    const Rgb8 &operator()(int x, int y) const { return pixels_(x, y); }

    bool operator==(const RgbImage &) const = default;

private:
    Plane<Rgb8> pixels_;
};

using FlowRgb = RgbImage;

class BinaryMask {
public:
    explicit BinaryMask(Plane<std::uint8_t> bits);

    int width() const noexcept { return bits_.width(); }
    int height() const noexcept { return bits_.height(); }
    const Plane<std::uint8_t> &plane() const noexcept { return bits_; }
    bool operator()(int x, int y) const { return bits_(x, y) != 0; }
    std::size_t count() const noexcept;

    bool operator==(const BinaryMask &) const = default;

private:
    Plane<std::uint8_t> bits_;
};

/// Real-valued foreground probability map with values in [0, 1].
class SaliencyMap {
public:
    explicit SaliencyMap(Plane<float> values);

    int width() const noexcept { return values_.width(); }
    int height() const noexcept { return values_.height(); }
    const Plane<float> &plane() const noexcept { return values_; }

private:
    Plane<float> values_;
};

/// Random draws for one axis of the depth-to-motion transform.
struct AxisParams {
    bool reverse = false; // r
    float shift = 0.0f;   // s in [-1, 1]
    float scale = 1.0f;   // alpha in [0, 1]

    bool operator==(const AxisParams &) const = default;
};

class SynthParams {
public:
    SynthParams(AxisParams x, AxisParams y, std::uint64_t sample_seed);

    const AxisParams &x() const noexcept { return x_; }
    const AxisParams &y() const noexcept { return y_; }
    std::uint64_t sample_seed() const noexcept { return sample_seed_; }

    bool operator==(const SynthParams &) const = default;

private:
    AxisParams x_;
    AxisParams y_;
    std::uint64_t sample_seed_;
};

enum class SampleSource { real, synthetic };

const char *to_string(SampleSource source) noexcept;
SampleSource sample_source_from_string(const std::string &text);

/// One image/flow/mask triplet of a manifest. Paths are held absolute and
/// lexically normalized; serialization makes them relative to a root.
struct SampleRecordFields {
    std::string sample_id;
    std::filesystem::path image;
    std::optional<std::filesystem::path> depth;
    std::optional<std::filesystem::path> flow_flo;
    std::optional<std::filesystem::path> flow_png;
    std::filesystem::path mask;
    SampleSource source = SampleSource::synthetic;
    std::string context_id;
    std::optional<SynthParams> params;
};

class SampleRecord {
public:
    explicit SampleRecord(SampleRecordFields fields);

    const std::string &sample_id() const noexcept { return f_.sample_id; }
    const std::filesystem::path &image() const noexcept { return f_.image; }
    const std::optional<std::filesystem::path> &depth() const noexcept { return f_.depth; }
    const std::optional<std::filesystem::path> &flow_flo() const noexcept { return f_.flow_flo; }
    const std::optional<std::filesystem::path> &flow_png() const noexcept { return f_.flow_png; }
    const std::filesystem::path &mask() const noexcept { return f_.mask; }
    SampleSource source() const noexcept { return f_.source; }
    const std::string &context_id() const noexcept { return f_.context_id; }
    const std::optional<SynthParams> &params() const noexcept { return f_.params; }
    const SampleRecordFields &fields() const noexcept { return f_; }

private:
    SampleRecordFields f_;
};

} // namespace flowsynth
