#include "flowsynth/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace flowsynth {
namespace fs = std::filesystem;
namespace {

std::vector<std::uint8_t> read_file_bytes(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on " + path.string());
    return bytes;
}

void write_file_bytes(const fs::path &path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("short write on " + path.string());
}

void put_u32_le(std::vector<std::uint8_t> &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at, bool little_endian) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const std::uint32_t b = bytes[at + static_cast<std::size_t>(i)];
        v |= little_endian ? b << (8 * i) : b << (8 * (3 - i));
    }
    return v;
}

// ---------------------------------------------------------------- PNG ----

struct DecodedPng {
    int width = 0;
    int height = 0;
    int source_color_type = 0;
    int source_bit_depth = 0;
    int bit_depth = 0; // after transforms
    int channels = 0;
    std::size_t row_bytes = 0;
    std::vector<std::uint8_t> data;
    std::vector<Rgb8> palette;

    std::uint16_t sample(int x, int y, int channel = 0) const {
        const std::size_t base = static_cast<std::size_t>(y) * row_bytes;
        const std::size_t idx = static_cast<std::size_t>(x) * static_cast<std::size_t>(channels) +
                                static_cast<std::size_t>(channel);
        if (bit_depth == 16) {
            return static_cast<std::uint16_t>((data[base + 2 * idx] << 8) | data[base + 2 * idx + 1]);
        }
        return data[base + idx];
    }
};

struct PngErrorState {
    char message[256] = {};
};

[[noreturn]] void png_on_error(png_structp png, png_const_charp msg) {
    auto *state = static_cast<PngErrorState *>(png_get_error_ptr(png));
    std::strncpy(state->message, msg, sizeof(state->message) - 1);
    std::longjmp(png_jmpbuf(png), 1);
}

void png_on_warning(png_structp, png_const_charp) {}

struct ReadCursor {
    const std::uint8_t *data;
    std::size_t size;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto *cursor = static_cast<ReadCursor *>(png_get_io_ptr(png));
    if (cursor->size - cursor->pos < count) png_error(png, "truncated PNG stream");
    std::memcpy(out, cursor->data + cursor->pos, count);
    cursor->pos += count;
}

void decode_png_into(std::span<const std::uint8_t> bytes, bool to_rgb8, DecodedPng &out,
                     std::vector<png_bytep> &rows, PngErrorState &err, bool &failed) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_on_error, png_on_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(png ? &png : nullptr, nullptr, nullptr);
        std::strncpy(err.message, "libpng initialisation failed", sizeof(err.message) - 1);
        failed = true;
        return;
    }
    ReadCursor cursor{bytes.data(), bytes.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        failed = true;
        return;
    }
    png_set_read_fn(png, &cursor, png_read_from_memory);
    png_read_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.source_color_type = png_get_color_type(png, info);
    out.source_bit_depth = png_get_bit_depth(png, info);

    if (out.source_color_type == PNG_COLOR_TYPE_PALETTE) {
        png_colorp palette = nullptr;
        int n = 0;
        if (png_get_PLTE(png, info, &palette, &n) == PNG_INFO_PLTE) {
            for (int i = 0; i < n; ++i) out.palette.push_back({palette[i].red, palette[i].green, palette[i].blue});
        }
    }

    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
    if (to_rgb8) {
        if (out.source_color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (out.source_color_type == PNG_COLOR_TYPE_GRAY || out.source_color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
            if (out.source_bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
            png_set_gray_to_rgb(png);
        }
        if (out.source_bit_depth == 16) png_set_strip_16(png);
        if (out.source_color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    } else if (out.source_bit_depth < 8) {
        if (out.source_color_type == PNG_COLOR_TYPE_GRAY) {
            png_set_expand_gray_1_2_4_to_8(png);
        } else {
            png_set_packing(png);
        }
    }
    png_read_update_info(png, info);

    out.bit_depth = png_get_bit_depth(png, info);
    out.channels = png_get_channels(png, info);
    out.row_bytes = png_get_rowbytes(png, info);
    out.data.resize(out.row_bytes * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) rows[static_cast<std::size_t>(y)] = out.data.data() + out.row_bytes * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

DecodedPng decode_png(const fs::path &path, bool to_rgb8) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw FormatError(path.string() + ": not a PNG file", 0);
    }
    DecodedPng out;
    std::vector<png_bytep> rows;
    PngErrorState err;
    bool failed = false;
    decode_png_into(bytes, to_rgb8, out, rows, err, failed);
    if (failed) throw FormatError(path.string() + ": " + err.message);
    return out;
}

struct WriteSink {
    std::vector<std::uint8_t> bytes;
};

void png_write_to_memory(png_structp png, png_bytep data, png_size_t count) {
    auto *sink = static_cast<WriteSink *>(png_get_io_ptr(png));
    sink->bytes.insert(sink->bytes.end(), data, data + count);
}

void png_flush_noop(png_structp) {}

struct PngLayout {
    int width;
    int height;
    int color_type;
    int bit_depth;
    std::size_t row_bytes;
};

void encode_png_into(const PngLayout &layout, const std::uint8_t *data, std::vector<png_color> &plte,
                     WriteSink &sink, std::vector<png_bytep> &rows, PngErrorState &err, bool &failed) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_on_error, png_on_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(png ? &png : nullptr, nullptr);
        std::strncpy(err.message, "libpng initialisation failed", sizeof(err.message) - 1);
        failed = true;
        return;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        failed = true;
        return;
    }
    png_set_write_fn(png, &sink, png_write_to_memory, png_flush_noop);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(layout.width), static_cast<png_uint_32>(layout.height),
                 layout.bit_depth, layout.color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    if (!plte.empty()) png_set_PLTE(png, info, plte.data(), static_cast<int>(plte.size()));
    png_write_info(png, info);
    rows.resize(static_cast<std::size_t>(layout.height));
    for (int y = 0; y < layout.height; ++y) {
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(data + layout.row_bytes * static_cast<std::size_t>(y));
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_png(const PngLayout &layout, const std::vector<std::uint8_t> &data, const fs::path &path,
               std::span<const Rgb8> palette = {}) {
    WriteSink sink;
    std::vector<png_bytep> rows;
    std::vector<png_color> plte(palette.size());
    for (std::size_t i = 0; i < palette.size(); ++i) plte[i] = {palette[i].r, palette[i].g, palette[i].b};
    PngErrorState err;
    bool failed = false;
    encode_png_into(layout, data.data(), plte, sink, rows, err, failed);
    if (failed) throw IoError(path.string() + ": PNG encoding failed: " + err.message);
    write_file_bytes(path, sink.bytes);
}

std::string lower_extension(const fs::path &path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// ---------------------------------------------------------------- PFM ----

DepthMap read_pfm(const fs::path &path) {
    const auto bytes = read_file_bytes(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    };
    auto token = [&](const char *what) {
        skip_space();
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
        if (start == pos) throw FormatError(path.string() + ": PFM header ends before " + what, start);
        return std::pair{std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos)),
                         start};
    };

    const auto [magic, magic_at] = token("magic");
    if (magic == "PF") throw FormatError(path.string() + ": color PFM is not a depth map", magic_at);
    if (magic != "Pf") throw FormatError(path.string() + ": bad PFM magic '" + magic + "'", magic_at);

    auto parse_int = [&](const char *what) {
        const auto [text, at] = token(what);
        try {
            std::size_t used = 0;
            const int v = std::stoi(text, &used);
            if (used != text.size() || v <= 0) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception &) {
            throw FormatError(path.string() + ": bad PFM " + what + " '" + text + "'", at);
        }
    };
    const int width = parse_int("width");
    const int height = parse_int("height");
    const auto [scale_text, scale_at] = token("scale");
    double scale = 0.0;
    try {
        std::size_t used = 0;
        scale = std::stod(scale_text, &used);
        if (used != scale_text.size()) throw std::invalid_argument(scale_text);
    } catch (const std::exception &) {
        throw FormatError(path.string() + ": bad PFM scale '" + scale_text + "'", scale_at);
    }
    if (scale == 0.0 || !std::isfinite(scale)) throw FormatError(path.string() + ": PFM scale must be non-zero", scale_at);
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw FormatError(path.string() + ": PFM header not terminated", pos);
    }
    ++pos; // single whitespace byte separates header from payload

    const bool little_endian = scale < 0.0;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - pos < count * 4) {
        throw FormatError(path.string() + ": PFM payload truncated, expected " + std::to_string(count * 4) +
                              " bytes",
                          bytes.size());
    }
    Plane<float> values(width, height);
    for (int row = 0; row < height; ++row) {
        const int y = height - 1 - row; // PFM stores the bottom row first
        for (int x = 0; x < width; ++x) {
            const std::size_t at = pos + (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                                          static_cast<std::size_t>(x)) * 4;
            const float v = std::bit_cast<float>(get_u32(bytes, at, little_endian));
            if (std::isnan(v) || std::isinf(v)) {
                throw DataError(path.string() + ": non-finite depth at pixel (" + std::to_string(x) + ", " +
                                std::to_string(y) + ")");
            }
            values(x, y) = v;
        }
    }
    return DepthMap(std::move(values), DepthState::raw);
}

DepthMap read_png_depth(const fs::path &path, DepthFormat format) {
    const DecodedPng png = decode_png(path, false);
    if (png.source_color_type != PNG_COLOR_TYPE_GRAY) {
        throw FormatError(path.string() + ": depth PNG must be single-channel grayscale");
    }
    if (format == DepthFormat::png8 && png.bit_depth != 8) {
        throw FormatError(path.string() + ": expected an 8-bit depth PNG, found " + std::to_string(png.bit_depth) + "-bit");
    }
    if (format == DepthFormat::png16 && png.bit_depth != 16) {
        throw FormatError(path.string() + ": expected a 16-bit depth PNG, found " + std::to_string(png.bit_depth) + "-bit");
    }
    Plane<float> values(png.width, png.height);
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) values(x, y) = static_cast<float>(png.sample(x, y));
    }
    return DepthMap(std::move(values), DepthState::raw);
}

} // namespace

DepthMap read_depth(const fs::path &path, DepthFormat format) {
    if (format == DepthFormat::detect) {
        const auto ext = lower_extension(path);
        if (ext == ".pfm") return read_pfm(path);
        if (ext == ".png") return read_png_depth(path, DepthFormat::detect);
        throw FormatError(path.string() + ": cannot infer depth format from extension '" + ext + "'");
    }
    if (format == DepthFormat::pfm) return read_pfm(path);
    return read_png_depth(path, format);
}

void write_pfm(const Plane<float> &values, const fs::path &path) {
    const std::string header =
        "Pf\n" + std::to_string(values.width()) + " " + std::to_string(values.height()) + "\n-1.0\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + values.size() * 4);
    for (int row = 0; row < values.height(); ++row) {
        const int y = values.height() - 1 - row;
        for (int x = 0; x < values.width(); ++x) put_u32_le(bytes, std::bit_cast<std::uint32_t>(values(x, y)));
    }
    write_file_bytes(path, bytes);
}

std::vector<std::uint8_t> encode_flo(const MotionField &field) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(12 + field.u().size() * 8);
    put_u32_le(bytes, std::bit_cast<std::uint32_t>(kFloMagic));
    put_u32_le(bytes, static_cast<std::uint32_t>(field.width()));
    put_u32_le(bytes, static_cast<std::uint32_t>(field.height()));
    const auto u = field.u().values();
    const auto v = field.v().values();
    for (std::size_t i = 0; i < u.size(); ++i) {
        put_u32_le(bytes, std::bit_cast<std::uint32_t>(u[i]));
        put_u32_le(bytes, std::bit_cast<std::uint32_t>(v[i]));
    }
    return bytes;
}

MotionField decode_flo(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) throw FormatError(".flo header truncated", bytes.size());
    if (std::bit_cast<float>(get_u32(bytes, 0, true)) != kFloMagic) {
        throw FormatError(".flo magic mismatch (expected 202021.25 / \"PIEH\")", 0);
    }
    const auto width = static_cast<std::int32_t>(get_u32(bytes, 4, true));
    const auto height = static_cast<std::int32_t>(get_u32(bytes, 8, true));
    if (width <= 0) throw FormatError(".flo width " + std::to_string(width) + " is not positive", 4);
    if (height <= 0) throw FormatError(".flo height " + std::to_string(height) + " is not positive", 8);
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - 12 != count * 8) {
        throw FormatError(".flo payload is " + std::to_string(bytes.size() - 12) + " bytes, header implies " +
                              std::to_string(count * 8),
                          12);
    }
    std::vector<float> u(count), v(count);
    for (std::size_t i = 0; i < count; ++i) {
        u[i] = std::bit_cast<float>(get_u32(bytes, 12 + 8 * i, true));
        v[i] = std::bit_cast<float>(get_u32(bytes, 16 + 8 * i, true));
        if (!std::isfinite(u[i]) || !std::isfinite(v[i])) {
            throw DataError(".flo payload holds a non-finite value at pixel " + std::to_string(i));
        }
    }
    return MotionField(Plane<float>(width, height, std::move(u)), Plane<float>(width, height, std::move(v)),
                       MotionStage::raw);
}

void write_flo(const MotionField &field, const fs::path &path) {
    write_file_bytes(path, encode_flo(field));
}

MotionField read_flo(const fs::path &path) {
    const auto bytes = read_file_bytes(path);
    try {
        return decode_flo(bytes);
    } catch (const FormatError &e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const DataError &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_png_rgb(const RgbImage &image, const fs::path &path) {
    const PngLayout layout{image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8,
                           static_cast<std::size_t>(image.width()) * 3};
    std::vector<std::uint8_t> data;
    data.reserve(layout.row_bytes * static_cast<std::size_t>(image.height()));
    for (const Rgb8 &p : image.plane().values()) {
        data.push_back(p.r);
        data.push_back(p.g);
        data.push_back(p.b);
    }
    write_png(layout, data, path);
}

RgbImage read_png_rgb(const fs::path &path) {
    const DecodedPng png = decode_png(path, true);
    if (png.channels != 3 || png.bit_depth != 8) throw FormatError(path.string() + ": could not decode to 8-bit RGB");
    Plane<Rgb8> pixels(png.width, png.height);
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) {
            pixels(x, y) = {static_cast<std::uint8_t>(png.sample(x, y, 0)), static_cast<std::uint8_t>(png.sample(x, y, 1)),
                            static_cast<std::uint8_t>(png.sample(x, y, 2))};
        }
    }
    return RgbImage(std::move(pixels));
}

void write_png_gray8(const Plane<std::uint8_t> &values, const fs::path &path) {
    const PngLayout layout{values.width(), values.height(), PNG_COLOR_TYPE_GRAY, 8,
                           static_cast<std::size_t>(values.width())};
    write_png(layout, std::vector<std::uint8_t>(values.values().begin(), values.values().end()), path);
}

void write_png_gray16(const Plane<std::uint16_t> &values, const fs::path &path) {
    const PngLayout layout{values.width(), values.height(), PNG_COLOR_TYPE_GRAY, 16,
                           static_cast<std::size_t>(values.width()) * 2};
    std::vector<std::uint8_t> data;
    data.reserve(values.size() * 2);
    for (std::uint16_t v : values.values()) {
        data.push_back(static_cast<std::uint8_t>(v >> 8));
        data.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    write_png(layout, data, path);
}

void write_png_indexed(const Plane<std::uint8_t> &indices, std::span<const Rgb8> palette, const fs::path &path) {
    if (palette.empty() || palette.size() > 256) throw ContractError("palette must hold 1..256 colors");
    for (std::uint8_t i : indices.values()) {
        if (i >= palette.size()) throw ContractError("label index " + std::to_string(i) + " exceeds palette size");
    }
    const PngLayout layout{indices.width(), indices.height(), PNG_COLOR_TYPE_PALETTE, 8,
                           static_cast<std::size_t>(indices.width())};
    write_png(layout, std::vector<std::uint8_t>(indices.values().begin(), indices.values().end()), path, palette);
}

BinaryMask read_mask(const fs::path &path, MaskMode mode) {
    const DecodedPng png = decode_png(path, false);
    Plane<std::uint8_t> bits(png.width, png.height);
    if (png.source_color_type == PNG_COLOR_TYPE_PALETTE) {
        for (int y = 0; y < png.height; ++y) {
            for (int x = 0; x < png.width; ++x) bits(x, y) = png.sample(x, y) != 0 ? 1 : 0;
        }
        return BinaryMask(std::move(bits));
    }
    if (png.source_color_type != PNG_COLOR_TYPE_GRAY) {
        throw FormatError(path.string() + ": mask must be grayscale or paletted, found color type " + std::to_string(png.source_color_type));
    }
    const int shift = png.bit_depth == 16 ? 8 : 0;
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) {
            const int v = png.sample(x, y) >> shift;
            const bool on = mode == MaskMode::any_label ? png.sample(x, y) != 0 : v > kMaskThreshold;
            bits(x, y) = on ? 1 : 0;
        }
    }
    return BinaryMask(std::move(bits));
}

void write_mask(const BinaryMask &mask, const fs::path &path) {
    Plane<std::uint8_t> gray(mask.width(), mask.height());
    const auto src = mask.plane().values();
    auto dst = gray.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
    write_png_gray8(gray, path);
}

SaliencyMap read_saliency(const fs::path &path) {
    const DecodedPng png = decode_png(path, false);
    if (png.source_color_type != PNG_COLOR_TYPE_GRAY) {
        throw FormatError(path.string() + ": saliency map must be a grayscale PNG");
    }
    const float full = png.bit_depth == 16 ? 65535.0f : 255.0f;
    Plane<float> values(png.width, png.height);
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) values(x, y) = static_cast<float>(png.sample(x, y)) / full;
    }
    return SaliencyMap(std::move(values));
}

} // namespace flowsynth
