#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowsynth/core.hpp"
#include "flowsynth/raster_io.hpp"
#include "flowsynth/worker_pool.hpp"

namespace flowsynth {

inline constexpr const char *kToolVersion = "1.0.0";

/// Prefixes that keep real and synthetic sample ids disjoint.
inline constexpr const char *kRealIdPrefix = "real:";
inline constexpr const char *kSyntheticIdPrefix = "syn:";

struct ManifestMeta {
    std::uint64_t global_seed = 0;
    std::string created_at;
    std::string tool_version = kToolVersion;
};

/// Ordered, id-unique collection of sample records.
class Manifest {
public:
    Manifest() = default;
    /// Sorts by sample_id; duplicate ids raise ConsistencyError.
    Manifest(std::vector<SampleRecord> records, ManifestMeta meta);

    const std::vector<SampleRecord> &records() const noexcept { return records_; }
    const ManifestMeta &meta() const noexcept { return meta_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const SampleRecord *find(const std::string &sample_id) const;

private:
    std::vector<SampleRecord> records_;
    ManifestMeta meta_;
};

/// UTC ISO-8601 timestamp; honors SOURCE_DATE_EPOCH when set.
std::string utc_timestamp();

enum class FlowOutput { flo, png, both };

struct SyntheticBuildOptions {
    std::filesystem::path image_dir;
    std::filesystem::path depth_dir;
    std::filesystem::path mask_dir;
    std::filesystem::path output_dir; ///< flows land in output_dir/flows
    std::uint64_t global_seed = 0;
    float alpha_min = 0.0f;
    unsigned workers = default_worker_count();
    FlowOutput flow_output = FlowOutput::both;
    DepthFormat depth_format = DepthFormat::detect;
    std::optional<std::string> created_at;
};

/// Basenames that could not be turned into triplets.
struct SkipReport {
    std::vector<std::string> missing_depth; ///< image present, no depth map
    std::vector<std::string> missing_mask;  ///< image present, no mask
    std::vector<std::string> orphan_depth;  ///< depth map without image
    std::vector<std::string> orphan_mask;   ///< mask without image

    std::size_t total() const noexcept {
        return missing_depth.size() + missing_mask.size() + orphan_depth.size() + orphan_mask.size();
    }
};

struct SyntheticBuild {
    Manifest manifest;
    SkipReport skipped;
    std::size_t degenerate_depth = 0;
    std::size_t degenerate_flow = 0;
};

/// One synthetic triplet per basename present in all three trees. The
/// random stream for each sample is keyed by its basename; each image is
/// its own visual context.
SyntheticBuild build_synthetic_manifest(const SyntheticBuildOptions &options);

struct RealBuildOptions {
    /// Expects video_root/<image_subdir>/<seq>/..., and likewise for flows and masks.
    std::filesystem::path video_root;
    std::string image_subdir = "images";
    std::string flow_subdir = "flows";
    std::string mask_subdir = "masks";
    /// When set, multi-object masks are merged (union of labels) and
    /// written here as binary PNGs; records point at the merged copies.
    std::optional<std::filesystem::path> merged_mask_dir;
    std::uint64_t global_seed = 0;
    std::optional<std::string> created_at;
};

/// One real record per frame, context = sequence name.
Manifest build_real_manifest(const RealBuildOptions &options);

struct FramePairing {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; ///< (source, target)
};

/// Each frame pairs with its successor; the last frame pairs with its predecessor.
FramePairing pair_frames(std::size_t n_frames);

/// Concatenation; colliding sample ids raise ConsistencyError.
Manifest merge_manifests(const Manifest &real, const Manifest &synthetic);

struct MixRatio {
    unsigned real = 1;
    unsigned synthetic = 3;
};

MixRatio parse_ratio(const std::string &text); ///< "a:b"

struct SampledItem {
    SampleSource source;
    std::size_t record_index; ///< index into the source manifest's records
    std::string sample_id;
};

/// Deterministic interleaving of two manifests. Every window of
/// ratio.real + ratio.synthetic consecutive items holds exactly ratio.real
/// real samples, at any offset: the source pattern of one window is
/// shuffled once per epoch and repeated. Each source is consumed without
/// replacement and reshuffled when exhausted. `length` defaults to the
/// combined record count.
std::vector<SampledItem> mixed_sampler(const Manifest &real, const Manifest &synthetic, MixRatio ratio,
                                       std::uint64_t epoch_seed, std::optional<std::size_t> length = std::nullopt);

struct SourceStats {
    std::size_t triplets = 0;
    std::size_t contexts = 0;
};

struct DatasetStats {
    std::size_t n_triplets = 0;
    std::size_t n_contexts = 0; ///< distinct (source, context_id) pairs
    SourceStats real;
    SourceStats synthetic;
};

DatasetStats compute_stats(const Manifest &manifest);

/// "#Triplets / #Visual Contexts" table, one row per (label, stats).
std::string format_stats_table(const std::vector<std::pair<std::string, DatasetStats>> &rows);

} // namespace flowsynth
