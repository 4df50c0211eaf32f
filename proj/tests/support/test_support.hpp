#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "flowsynth/core.hpp"
#include "flowsynth/dataset.hpp"
#include "flowsynth/raster_io.hpp"

namespace testing {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string &tag = "flowsynth") {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const { return path_; }
    std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::vector<std::uint8_t> file_bytes(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path &p, const std::vector<std::uint8_t> &bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline flowsynth::Plane<float> random_plane(std::mt19937_64 &rng, int w, int h, float lo, float hi) {
    std::uniform_real_distribution<float> dist(lo, hi);
    flowsynth::Plane<float> p(w, h);
    for (float &v : p.values()) v = dist(rng);
    return p;
}

inline flowsynth::DepthMap random_raw_depth(std::mt19937_64 &rng, int w, int h) {
    return flowsynth::DepthMap(random_plane(rng, w, h, 0.0f, 1000.0f), flowsynth::DepthState::raw);
}

inline flowsynth::SynthParams random_params(std::mt19937_64 &rng) {
    std::uniform_real_distribution<float> shift(-1.0f, 1.0f), scale(0.0f, 1.0f);
    std::bernoulli_distribution coin(0.5);
    const flowsynth::AxisParams x{coin(rng), shift(rng), scale(rng)};
    const flowsynth::AxisParams y{coin(rng), shift(rng), scale(rng)};
    return flowsynth::SynthParams(x, y, rng());
}

/// Random field normalized so the largest component magnitude is 1.
inline flowsynth::MotionField random_normalized_field(std::mt19937_64 &rng, int w, int h) {
    auto u = random_plane(rng, w, h, -1.0f, 1.0f);
    auto v = random_plane(rng, w, h, -1.0f, 1.0f);
    float peak = 0.0f;
    for (float x : u.values()) peak = std::max(peak, std::fabs(x));
    for (float x : v.values()) peak = std::max(peak, std::fabs(x));
    for (float &x : u.values()) x /= peak;
    for (float &x : v.values()) x /= peak;
    return flowsynth::MotionField(std::move(u), std::move(v), flowsynth::MotionStage::normalized);
}

/// Random blob mask: a handful of filled rectangles and disks.
inline flowsynth::BinaryMask random_blob_mask(std::mt19937_64 &rng, int w, int h) {
    flowsynth::Plane<std::uint8_t> bits(w, h, 0);
    std::uniform_int_distribution<int> shapes(0, 3), px(0, w - 1), py(0, h - 1), extent(1, std::max(1, std::min(w, h) / 2));
    const int n = shapes(rng);
    for (int s = 0; s < n; ++s) {
        const int cx = px(rng), cy = py(rng), r = extent(rng);
        const bool disk = rng() & 1;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int dx = x - cx, dy = y - cy;
                if (disk ? dx * dx + dy * dy <= r * r : (std::abs(dx) <= r && std::abs(dy) <= r / 2 + 1)) bits(x, y) = 1;
            }
    }
    return flowsynth::BinaryMask(std::move(bits));
}

/// Uniform-noise mask with the given foreground density.
inline flowsynth::BinaryMask random_noise_mask(std::mt19937_64 &rng, int w, int h, double density) {
    std::bernoulli_distribution coin(density);
    flowsynth::Plane<std::uint8_t> bits(w, h, 0);
    for (auto &b : bits.values()) b = coin(rng) ? 1 : 0;
    return flowsynth::BinaryMask(std::move(bits));
}

/// A DUTS-style flat tree: images/, depth/, masks/ with `n` samples named
/// img_0000 ... Depth maps are PFM with a bright disk on a gradient.
inline void write_flat_fixture(const std::filesystem::path &root, int n, int w = 16, int h = 12) {
    namespace fs = std::filesystem;
    fs::create_directories(root / "images");
    fs::create_directories(root / "depth");
    fs::create_directories(root / "masks");
    for (int i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%04d", i);
        flowsynth::Plane<flowsynth::Rgb8> img(w, h);
        flowsynth::Plane<float> depth(w, h);
        flowsynth::Plane<std::uint8_t> mask(w, h, 0);
        const int cx = (i * 7) % w, cy = (i * 5) % h, r = 2 + i % 3;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const bool inside = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
                img(x, y) = {static_cast<std::uint8_t>(x * 10), static_cast<std::uint8_t>(y * 10),
                             static_cast<std::uint8_t>(i)};
                depth(x, y) = inside ? 50.0f + static_cast<float>(i) : 0.1f * static_cast<float>(x + y);
                mask(x, y) = inside ? 1 : 0;
            }
        flowsynth::write_png_rgb(flowsynth::RgbImage(std::move(img)), root / "images" / (std::string(name) + ".png"));
        flowsynth::write_pfm(depth, root / "depth" / (std::string(name) + ".pfm"));
        flowsynth::write_mask(flowsynth::BinaryMask(std::move(mask)), root / "masks" / (std::string(name) + ".png"));
    }
}

/// A DAVIS-style tree: images/<seq>/, flows/<seq>/, masks/<seq>/.
inline void write_video_fixture(const std::filesystem::path &root, const std::vector<int> &frames_per_sequence,
                                int w = 8, int h = 6) {
    namespace fs = std::filesystem;
    for (std::size_t s = 0; s < frames_per_sequence.size(); ++s) {
        char seq[32];
        std::snprintf(seq, sizeof(seq), "seq%02zu", s);
        for (const char *sub : {"images", "flows", "masks"}) fs::create_directories(root / sub / seq);
        for (int f = 0; f < frames_per_sequence[s]; ++f) {
            char frame[32];
            std::snprintf(frame, sizeof(frame), "%05d", f);
            flowsynth::Plane<flowsynth::Rgb8> img(w, h, flowsynth::Rgb8{10, 20, 30});
            flowsynth::Plane<float> u(w, h, 0.25f), v(w, h, -0.5f);
            flowsynth::Plane<std::uint8_t> mask(w, h, 0);
            mask(f % w, 0) = 1;
            flowsynth::write_png_rgb(flowsynth::RgbImage(std::move(img)), root / "images" / seq / (std::string(frame) + ".png"));
            flowsynth::write_flo(flowsynth::MotionField(std::move(u), std::move(v), flowsynth::MotionStage::raw),
                                 root / "flows" / seq / (std::string(frame) + ".flo"));
            flowsynth::write_mask(flowsynth::BinaryMask(std::move(mask)), root / "masks" / seq / (std::string(frame) + ".png"));
        }
    }
}

/// In-memory synthetic manifest with placeholder paths: one context per record.
inline flowsynth::Manifest make_synthetic_manifest(std::size_t n, const std::string &prefix = "img") {
    std::vector<flowsynth::SampleRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string stem = prefix + "_" + std::to_string(i);
        flowsynth::SampleRecordFields f;
        f.sample_id = flowsynth::kSyntheticIdPrefix + stem;
        f.image = "/data/images/" + stem + ".jpg";
        f.depth = "/data/depth/" + stem + ".pfm";
        f.flow_flo = "/data/flows/" + stem + ".flo";
        f.mask = "/data/masks/" + stem + ".png";
        f.source = flowsynth::SampleSource::synthetic;
        f.context_id = stem;
        f.params = flowsynth::SynthParams({}, {}, i);
        records.emplace_back(std::move(f));
    }
    return flowsynth::Manifest(std::move(records), {});
}

/// In-memory real manifest: sequence s holds frames_per_sequence[s] records.
inline flowsynth::Manifest make_real_manifest(const std::vector<std::size_t> &frames_per_sequence) {
    std::vector<flowsynth::SampleRecord> records;
    for (std::size_t s = 0; s < frames_per_sequence.size(); ++s) {
        const std::string seq = "seq" + std::to_string(s);
        for (std::size_t k = 0; k < frames_per_sequence[s]; ++k) {
            const std::string frame = std::to_string(k);
            flowsynth::SampleRecordFields f;
            f.sample_id = flowsynth::kRealIdPrefix + seq + "/" + frame;
            f.image = "/video/images/" + seq + "/" + frame + ".jpg";
            f.flow_flo = "/video/flows/" + seq + "/" + frame + ".flo";
            f.mask = "/video/masks/" + seq + "/" + frame + ".png";
            f.source = flowsynth::SampleSource::real;
            f.context_id = seq;
            records.emplace_back(std::move(f));
        }
    }
    return flowsynth::Manifest(std::move(records), {});
}

/// Splits `total` frames over `sequences` as evenly as possible.
inline std::vector<std::size_t> spread(std::size_t total, std::size_t sequences) {
    std::vector<std::size_t> out(sequences, total / sequences);
    for (std::size_t i = 0; i < total % sequences; ++i) ++out[i];
    return out;
}

} // namespace testing
