#include "flowsynth/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "flowsynth/flow_render.hpp"
#include "flowsynth/motion_synth.hpp"

namespace flowsynth {
namespace fs = std::filesystem;
namespace {

fs::path normalized_absolute(const fs::path &p) { return fs::absolute(p).lexically_normal(); }

void require_directory(const fs::path &dir, const char *role) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw InputError(std::string(role) + " directory not found: " + dir.string());
}

/// Regular, non-hidden files of `dir` keyed by stem, sorted.
std::map<std::string, fs::path> files_by_stem(const fs::path &dir, const std::vector<std::string> &extensions = {}) {
    std::map<std::string, fs::path> out;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.empty() || name.front() == '.') continue;
        if (!extensions.empty()) {
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            if (std::find(extensions.begin(), extensions.end(), ext) == extensions.end()) continue;
        }
        const auto stem = entry.path().stem().string();
        const auto [it, inserted] = out.emplace(stem, normalized_absolute(entry.path()));
        if (!inserted) {
            throw ConsistencyError("ambiguous basename '" + stem + "' in " + dir.string() + ": " +
                                   it->second.filename().string() + " and " + name);
        }
    }
    return out;
}

std::vector<std::string> subdirectories(const fs::path &dir) {
    std::vector<std::string> out;
    for (const auto &entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_directory() && !name.empty() && name.front() != '.') out.push_back(name);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string lower_ext(const fs::path &p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

} // namespace

Manifest::Manifest(std::vector<SampleRecord> records, ManifestMeta meta)
    : records_(std::move(records)), meta_(std::move(meta)) {
    std::sort(records_.begin(), records_.end(),
              [](const SampleRecord &a, const SampleRecord &b) { return a.sample_id() < b.sample_id(); });
    const auto dup = std::adjacent_find(records_.begin(), records_.end(), [](const SampleRecord &a, const SampleRecord &b) {
        return a.sample_id() == b.sample_id();
    });
    if (dup != records_.end()) throw ConsistencyError("duplicate sample_id '" + dup->sample_id() + "'");
}

const SampleRecord *Manifest::find(const std::string &sample_id) const {
    const auto it = std::lower_bound(records_.begin(), records_.end(), sample_id,
                                     [](const SampleRecord &r, const std::string &id) { return r.sample_id() < id; });
    return it != records_.end() && it->sample_id() == sample_id ? &*it : nullptr;
}

std::string utc_timestamp() {
    std::time_t t = 0;
    if (const char *epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

SyntheticBuild build_synthetic_manifest(const SyntheticBuildOptions &options) {
    require_directory(options.image_dir, "image");
    require_directory(options.depth_dir, "depth");
    require_directory(options.mask_dir, "mask");
    const DrawOptions draw{options.alpha_min};
    if (!(draw.alpha_min >= 0.0f && draw.alpha_min <= 1.0f)) throw InputError("alpha_min must lie in [0, 1]");

    const auto images = files_by_stem(options.image_dir);
    const auto depths = files_by_stem(options.depth_dir, {".pfm", ".png"});
    const auto masks = files_by_stem(options.mask_dir, {".png"});

    SyntheticBuild build;
    std::vector<std::string> matched;
    for (const auto &[stem, path] : images) {
        const bool has_depth = depths.count(stem) != 0;
        const bool has_mask = masks.count(stem) != 0;
        if (!has_depth) build.skipped.missing_depth.push_back(stem);
        if (!has_mask) build.skipped.missing_mask.push_back(stem);
        if (has_depth && has_mask) matched.push_back(stem);
    }
    for (const auto &[stem, path] : depths) {
        if (!images.count(stem)) build.skipped.orphan_depth.push_back(stem);
    }
    for (const auto &[stem, path] : masks) {
        if (!images.count(stem)) build.skipped.orphan_mask.push_back(stem);
    }
    if (matched.empty()) {
        throw InputError("no basename is shared by " + options.image_dir.string() + ", " + options.depth_dir.string() +
                         " and " + options.mask_dir.string());
    }

    const fs::path flow_dir = normalized_absolute(options.output_dir / "flows");
    std::error_code ec;
    fs::create_directories(flow_dir, ec);
    if (ec) throw IoError("cannot create " + flow_dir.string() + ": " + ec.message());

    const bool want_flo = options.flow_output != FlowOutput::png;
    const bool want_png = options.flow_output != FlowOutput::flo;

    struct Outcome {
        std::optional<SampleRecord> record;
        bool degenerate_depth = false;
        bool degenerate_flow = false;
    };
    std::vector<Outcome> outcomes(matched.size());

    parallel_for(matched.size(), options.workers, [&](std::size_t i) {
        const std::string &stem = matched[i];
        const DepthMap depth = read_depth(depths.at(stem), options.depth_format);
        const SynthParams params = draw_params(options.global_seed, stem, draw);
        const RenderResult rendered = render_pipeline(depth, params);

        SampleRecordFields f;
        f.sample_id = kSyntheticIdPrefix + stem;
        f.image = images.at(stem);
        f.depth = depths.at(stem);
        f.mask = masks.at(stem);
        f.source = SampleSource::synthetic;
        f.context_id = stem;
        f.params = params;
        if (want_flo) {
            f.flow_flo = flow_dir / (stem + ".flo");
            write_flo(rendered.flow, *f.flow_flo);
        }
        if (want_png) {
            f.flow_png = flow_dir / (stem + ".png");
            write_png_rgb(rendered.rgb, *f.flow_png);
        }
        outcomes[i] = {SampleRecord(std::move(f)), rendered.degenerate_depth, rendered.degenerate_flow};
    });

    std::vector<SampleRecord> records;
    records.reserve(outcomes.size());
    for (auto &o : outcomes) {
        records.push_back(std::move(*o.record));
        build.degenerate_depth += o.degenerate_depth ? 1 : 0;
        build.degenerate_flow += o.degenerate_flow ? 1 : 0;
    }
    build.manifest = Manifest(std::move(records),
                              {options.global_seed, options.created_at.value_or(utc_timestamp()), kToolVersion});
    return build;
}

Manifest build_real_manifest(const RealBuildOptions &options) {
    require_directory(options.video_root, "video root");
    const fs::path image_root = options.video_root / options.image_subdir;
    const fs::path flow_root = options.video_root / options.flow_subdir;
    const fs::path mask_root = options.video_root / options.mask_subdir;
    require_directory(image_root, "image");
    require_directory(flow_root, "flow");
    require_directory(mask_root, "mask");

    const auto sequences = subdirectories(image_root);
    if (sequences.empty()) throw InputError("no sequence directories under " + image_root.string());

    std::vector<SampleRecord> records;
    for (const auto &seq : sequences) {
        for (const auto &dir : {flow_root / seq, mask_root / seq}) {
            std::error_code ec;
            if (!fs::is_directory(dir, ec)) {
                throw ConsistencyError("sequence '" + seq + "' has no directory " + dir.string());
            }
        }
        const auto frames = files_by_stem(image_root / seq);
        const auto flows = files_by_stem(flow_root / seq, {".flo", ".png"});
        const auto masks = files_by_stem(mask_root / seq, {".png"});
        if (frames.size() != flows.size() || frames.size() != masks.size()) {
            throw ConsistencyError("sequence '" + seq + "' has " + std::to_string(frames.size()) + " frames, " +
                                   std::to_string(flows.size()) + " flows and " + std::to_string(masks.size()) +
                                   " masks");
        }
        if (frames.empty()) throw ConsistencyError("sequence '" + seq + "' has no frames");

        std::optional<fs::path> merged_dir;
        if (options.merged_mask_dir) {
            merged_dir = normalized_absolute(*options.merged_mask_dir / seq);
            fs::create_directories(*merged_dir);
        }

        auto flow_it = flows.begin();
        auto mask_it = masks.begin();
        for (const auto &[stem, image] : frames) {
            SampleRecordFields f;
            f.sample_id = kRealIdPrefix + seq + "/" + stem;
            f.image = image;
            if (lower_ext(flow_it->second) == ".flo") {
                f.flow_flo = flow_it->second;
            } else {
                f.flow_png = flow_it->second;
            }
            f.mask = mask_it->second;
            if (merged_dir) {
                f.mask = *merged_dir / (stem + ".png");
                write_mask(read_mask(mask_it->second, MaskMode::any_label), f.mask);
            }
            f.source = SampleSource::real;
            f.context_id = seq;
            records.emplace_back(std::move(f));
            ++flow_it;
            ++mask_it;
        }
    }
    return Manifest(std::move(records), {options.global_seed, options.created_at.value_or(utc_timestamp()), kToolVersion});
}

FramePairing pair_frames(std::size_t n_frames) {
    if (n_frames < 2) throw InputError("frame pairing needs at least 2 frames, got " + std::to_string(n_frames));
    FramePairing pairing;
    pairing.pairs.reserve(n_frames);
    for (std::size_t i = 0; i + 1 < n_frames; ++i) pairing.pairs.emplace_back(i, i + 1);
    pairing.pairs.emplace_back(n_frames - 1, n_frames - 2);
    return pairing;
}

Manifest merge_manifests(const Manifest &real, const Manifest &synthetic) {
    std::vector<SampleRecord> records = real.records();
    records.insert(records.end(), synthetic.records().begin(), synthetic.records().end());
    std::set<std::string> seen;
    for (const auto &r : real.records()) seen.insert(r.sample_id());
    for (const auto &r : synthetic.records()) {
        if (seen.count(r.sample_id())) throw ConsistencyError("sample_id '" + r.sample_id() + "' appears in both manifests");
    }
    ManifestMeta meta = synthetic.empty() && !real.empty() ? real.meta() : synthetic.meta();
    meta.created_at = std::max(real.meta().created_at, synthetic.meta().created_at);
    meta.tool_version = kToolVersion;
    return Manifest(std::move(records), std::move(meta));
}

MixRatio parse_ratio(const std::string &text) {
    const auto colon = text.find(':');
    auto parse = [&](const std::string &part) {
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos || part.size() > 6) {
            throw InputError("ratio must look like a:b with positive integers, got '" + text + "'");
        }
        const unsigned v = static_cast<unsigned>(std::stoul(part));
        if (v == 0) throw InputError("ratio components must be positive, got '" + text + "'");
        return v;
    };
    if (colon == std::string::npos) throw InputError("ratio must look like a:b, got '" + text + "'");
    return {parse(text.substr(0, colon)), parse(text.substr(colon + 1))};
}

namespace {

/// Endless without-replacement draw over [0, n), reshuffled every cycle.
class CyclingOrder {
public:
    CyclingOrder(std::size_t n, std::uint64_t epoch_seed, std::string tag)
        : order_(n), epoch_seed_(epoch_seed), tag_(std::move(tag)) {}

    std::size_t next() {
        if (pos_ == 0) reshuffle();
        const std::size_t v = order_[pos_];
        pos_ = (pos_ + 1) % order_.size();
        if (pos_ == 0) ++cycle_;
        return v;
    }

private:
    void reshuffle() {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        RngStream rng(epoch_seed_, tag_ + "/cycle/" + std::to_string(cycle_));
        for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.index(i)]);
    }

    std::vector<std::size_t> order_;
    std::uint64_t epoch_seed_;
    std::string tag_;
    std::size_t pos_ = 0;
    std::size_t cycle_ = 0;
};

} // namespace

std::vector<SampledItem> mixed_sampler(const Manifest &real, const Manifest &synthetic, MixRatio ratio,
                                       std::uint64_t epoch_seed, std::optional<std::size_t> length) {
    if (real.empty() || synthetic.empty()) throw ContractError("mixed_sampler needs two non-empty manifests");
    if (ratio.real == 0 || ratio.synthetic == 0) throw ContractError("mixed_sampler ratio components must be positive");

    const std::size_t window = ratio.real + ratio.synthetic;
    std::vector<SampleSource> pattern(ratio.real, SampleSource::real);
    pattern.insert(pattern.end(), ratio.synthetic, SampleSource::synthetic);
    RngStream pattern_rng(epoch_seed, "mix/pattern");
    for (std::size_t i = pattern.size(); i > 1; --i) std::swap(pattern[i - 1], pattern[pattern_rng.index(i)]);

    CyclingOrder real_order(real.size(), epoch_seed, "mix/real");
    CyclingOrder synthetic_order(synthetic.size(), epoch_seed, "mix/synthetic");

    const std::size_t n = length.value_or(real.size() + synthetic.size());
    std::vector<SampledItem> stream;
    stream.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (pattern[i % window] == SampleSource::real) {
            const std::size_t idx = real_order.next();
            stream.push_back({SampleSource::real, idx, real.records()[idx].sample_id()});
        } else {
            const std::size_t idx = synthetic_order.next();
            stream.push_back({SampleSource::synthetic, idx, synthetic.records()[idx].sample_id()});
        }
    }
    return stream;
}

DatasetStats compute_stats(const Manifest &manifest) {
    DatasetStats stats;
    std::set<std::string> real_contexts, synthetic_contexts;
    for (const auto &r : manifest.records()) {
        if (r.source() == SampleSource::real) {
            ++stats.real.triplets;
            real_contexts.insert(r.context_id());
        } else {
            ++stats.synthetic.triplets;
            synthetic_contexts.insert(r.context_id());
        }
    }
    stats.real.contexts = real_contexts.size();
    stats.synthetic.contexts = synthetic_contexts.size();
    stats.n_triplets = stats.real.triplets + stats.synthetic.triplets;
    stats.n_contexts = stats.real.contexts + stats.synthetic.contexts;
    return stats;
}

namespace {

std::string with_thousands(std::size_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

} // namespace

std::string format_stats_table(const std::vector<std::pair<std::string, DatasetStats>> &rows) {
    std::size_t label_w = std::string("Dataset").size();
    for (const auto &[label, s] : rows) label_w = std::max(label_w, label.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_w)) << "Dataset" << "  " << std::right << std::setw(10)
        << "#Triplets" << "  " << std::setw(17) << "#Visual Contexts" << '\n';
    for (const auto &[label, s] : rows) {
        out << std::left << std::setw(static_cast<int>(label_w)) << label << "  " << std::right << std::setw(10)
            << with_thousands(s.n_triplets) << "  " << std::setw(17) << with_thousands(s.n_contexts) << '\n';
    }
    return out.str();
}

} // namespace flowsynth
