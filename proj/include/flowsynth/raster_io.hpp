#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flowsynth/core.hpp"

namespace flowsynth {

enum class DepthFormat {
    pfm,
    png8,
    png16,
    detect, ///< pick from extension and PNG bit depth
};

/// Reads a depth map without rescaling. PFM rows are flipped into
/// top-left order; PNG integers map directly to floats.
DepthMap read_depth(const std::filesystem::path &path, DepthFormat format = DepthFormat::detect);

/// Writes a little-endian grayscale PFM ("Pf", scale -1).
void write_pfm(const Plane<float> &values, const std::filesystem::path &path);

// Middlebury .flo: float tag 202021.25, int32 width, int32 height, then
// interleaved float32 (u, v), row-major, all little-endian.
inline constexpr float kFloMagic = 202021.25f;

std::vector<std::uint8_t> encode_flo(const MotionField &field);
MotionField decode_flo(std::span<const std::uint8_t> bytes);

void write_flo(const MotionField &field, const std::filesystem::path &path);
/// Fields come back tagged MotionStage::raw.
MotionField read_flo(const std::filesystem::path &path);

void write_png_rgb(const RgbImage &image, const std::filesystem::path &path);
/// Accepts RGB, RGBA, gray and paletted PNGs, converting to 8-bit RGB.
RgbImage read_png_rgb(const std::filesystem::path &path);

void write_png_gray8(const Plane<std::uint8_t> &values, const std::filesystem::path &path);
void write_png_gray16(const Plane<std::uint16_t> &values, const std::filesystem::path &path);
/// Paletted 8-bit PNG carrying label indices (DAVIS / YouTube-VOS style annotations).
void write_png_indexed(const Plane<std::uint8_t> &indices, std::span<const Rgb8> palette,
                       const std::filesystem::path &path);

inline constexpr int kMaskThreshold = 127;

enum class MaskMode {
    threshold, ///< gray > 127 is foreground
    any_label, ///< any non-zero gray value is foreground (multi-object merge)
};

/// Grayscale masks binarize per `mode`; paletted masks treat every
/// non-zero palette index as foreground. Color masks are rejected.
BinaryMask read_mask(const std::filesystem::path &path, MaskMode mode = MaskMode::threshold);

/// Stores 0 / 255.
void write_mask(const BinaryMask &mask, const std::filesystem::path &path);

/// Grayscale PNG scaled into [0, 1] by its bit depth's maximum.
SaliencyMap read_saliency(const std::filesystem::path &path);

} // namespace flowsynth
