#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "flowsynth/dataset.hpp"
#include "flowsynth/evaluate.hpp"
#include "flowsynth/flow_render.hpp"
#include "flowsynth/manifest_io.hpp"
#include "flowsynth/motion_synth.hpp"
#include "flowsynth/raster_io.hpp"

namespace flowsynth::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::string &require(const std::string &value, const char *flag) {
    if (value.empty()) throw InputError(std::string("missing required option ") + flag);
    return value;
}

void require_directory(const fs::path &dir, const char *flag) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw InputError(std::string(flag) + " directory not found: " + dir.string());
}

void ensure_directory(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("short write on " + path.string());
}

unsigned worker_count(const RunConfig &c) { return c.workers == 0 ? default_worker_count() : c.workers; }

FlowOutput parse_flow_output(const std::string &text) {
    if (text == "flo") return FlowOutput::flo;
    if (text == "png") return FlowOutput::png;
    if (text == "both") return FlowOutput::both;
    throw InputError("--format must be flo, png or both, got '" + text + "'");
}

DepthFormat parse_depth_format(const std::string &text) {
    if (text == "detect") return DepthFormat::detect;
    if (text == "pfm") return DepthFormat::pfm;
    if (text == "png8") return DepthFormat::png8;
    if (text == "png16") return DepthFormat::png16;
    throw InputError("--depth-format must be detect, pfm, png8 or png16, got '" + text + "'");
}

std::vector<std::string> sorted_entries(const fs::path &dir, bool directories) {
    std::vector<std::string> out;
    for (const auto &entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.empty() || name.front() == '.') continue;
        if (directories ? entry.is_directory() : entry.is_regular_file()) out.push_back(name);
    }
    std::sort(out.begin(), out.end());
    return out;
}

json skip_report_json(const SkipReport &s) {
    return {{"missing_depth", s.missing_depth},
            {"missing_mask", s.missing_mask},
            {"orphan_depth", s.orphan_depth},
            {"orphan_mask", s.orphan_mask}};
}

// ------------------------------------------------------------ commands ----

int cmd_synthesize(const RunConfig &c, std::ostream &out, std::ostream &err) {
    SyntheticBuildOptions o;
    o.image_dir = require(c.images, "--images");
    o.depth_dir = require(c.depth, "--depth");
    o.mask_dir = require(c.masks, "--masks");
    o.output_dir = require(c.out, "--out");
    o.global_seed = c.seed;
    o.alpha_min = c.alpha_min;
    o.workers = worker_count(c);
    o.flow_output = parse_flow_output(c.format);
    o.depth_format = parse_depth_format(c.depth_format);

    const auto start = std::chrono::steady_clock::now();
    const SyntheticBuild build = build_synthetic_manifest(o);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path out_dir(c.out);
    write_manifest(build.manifest, out_dir / "manifest.jsonl");

    json summary;
    summary["records"] = build.manifest.size();
    summary["skipped_count"] = build.skipped.total();
    summary["skipped"] = skip_report_json(build.skipped);
    summary["degenerate_depth"] = build.degenerate_depth;
    summary["degenerate_flow"] = build.degenerate_flow;
    summary["seed"] = c.seed;
    summary["alpha_min"] = c.alpha_min;
    summary["workers"] = o.workers;
    summary["wall_time_s"] = seconds;
    summary["samples_per_s"] = seconds > 0 ? static_cast<double>(build.manifest.size()) / seconds : 0.0;
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");

    out << "synthesized " << build.manifest.size() << " samples in " << seconds << " s ("
        << summary["samples_per_s"].get<double>() << " samples/s), degenerate depth " << build.degenerate_depth
        << ", degenerate flow " << build.degenerate_flow << '\n';
    if (build.skipped.total() > 0) {
        err << "warning: " << build.skipped.total() << " basenames skipped, see " << (out_dir / "summary.json").string()
            << '\n';
    }
    return kExitOk;
}

int cmd_pair_frames(const RunConfig &c, std::ostream &out, std::ostream &) {
    const fs::path root = require(c.root, "--root");
    const fs::path out_dir = require(c.out, "--out");
    require_directory(root, "--root");
    const auto sequences = sorted_entries(root, true);
    if (sequences.empty()) throw InputError("no sequence directories under " + root.string());
    ensure_directory(out_dir);

    std::string skipped;
    std::size_t written = 0;
    for (const auto &seq : sequences) {
        const auto frames = sorted_entries(root / seq, false);
        if (frames.size() < 2) {
            skipped += seq + "\t" + std::to_string(frames.size()) + " frame(s)\n";
            continue;
        }
        std::string text;
        for (const auto &[src, dst] : pair_frames(frames.size()).pairs) {
            text += std::to_string(src) + ' ' + std::to_string(dst) + ' ' + frames[src] + ' ' + frames[dst] + '\n';
        }
        write_text(out_dir / (seq + ".pairs"), text);
        ++written;
    }
    write_text(out_dir / "skipped.txt", skipped);
    out << "wrote pairings for " << written << " sequences, skipped "
        << (sequences.size() - written) << '\n';
    return kExitOk;
}

int cmd_build(const RunConfig &c, std::ostream &out, std::ostream &) {
    RealBuildOptions o;
    o.video_root = require(c.video_root, "--video-root");
    const fs::path out_dir = require(c.out, "--out");
    ensure_directory(out_dir);
    if (c.merge_objects) o.merged_mask_dir = out_dir / "masks";
    o.global_seed = c.seed;
    const Manifest manifest = build_real_manifest(o);
    write_manifest(manifest, out_dir / "manifest.jsonl");
    const DatasetStats s = compute_stats(manifest);
    out << "built manifest with " << s.n_triplets << " triplets over " << s.n_contexts << " contexts\n";
    return kExitOk;
}

int cmd_merge(const RunConfig &c, std::ostream &out, std::ostream &) {
    const Manifest real = read_manifest(require(c.real, "--real"));
    const Manifest synthetic = read_manifest(require(c.synthetic, "--synthetic"));
    const fs::path target = require(c.out, "--out");
    const Manifest merged = merge_manifests(real, synthetic);
    if (target.has_parent_path()) ensure_directory(target.parent_path());
    write_manifest(merged, target);
    out << "merged " << real.size() << " real + " << synthetic.size() << " synthetic records into "
        << target.string() << '\n';
    return kExitOk;
}

int cmd_stats(const RunConfig &c, std::ostream &out, std::ostream &) {
    std::vector<std::string> paths = c.manifests;
    if (!c.manifest.empty()) paths.insert(paths.begin(), c.manifest);
    if (paths.empty()) throw InputError("missing required option --manifest");

    std::vector<std::pair<std::string, DatasetStats>> rows;
    json j = json::array();
    for (const auto &p : paths) {
        const DatasetStats s = compute_stats(read_manifest(p));
        const std::string prefix = paths.size() > 1 ? fs::path(p).filename().string() + " " : "";
        auto only = [](const SourceStats &src) {
            DatasetStats d;
            d.n_triplets = src.triplets;
            d.n_contexts = src.contexts;
            return d;
        };
        if (s.real.triplets > 0) rows.emplace_back(prefix + "Real", only(s.real));
        if (s.synthetic.triplets > 0) rows.emplace_back(prefix + "Synthetic", only(s.synthetic));
        if ((s.real.triplets > 0) == (s.synthetic.triplets > 0)) rows.emplace_back(prefix + "Mixed", s);
        j.push_back({{"manifest", p},
                     {"triplets", s.n_triplets},
                     {"contexts", s.n_contexts},
                     {"real", {{"triplets", s.real.triplets}, {"contexts", s.real.contexts}}},
                     {"synthetic", {{"triplets", s.synthetic.triplets}, {"contexts", s.synthetic.contexts}}}});
    }
    if (c.json) {
        out << j.dump(2) << '\n';
    } else {
        out << format_stats_table(rows);
    }
    return kExitOk;
}

int cmd_sample(const RunConfig &c, std::ostream &out, std::ostream &) {
    const Manifest real = read_manifest(require(c.real, "--real"));
    const Manifest synthetic = read_manifest(require(c.synthetic, "--synthetic"));
    if (real.empty() || synthetic.empty()) throw InputError("sample needs two non-empty manifests");
    const MixRatio ratio = parse_ratio(c.ratio);
    const auto stream = mixed_sampler(real, synthetic, ratio, c.seed,
                                      c.length == 0 ? std::nullopt : std::optional<std::size_t>(c.length));
    std::string text;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        text += std::to_string(i) + '\t' + to_string(stream[i].source) + '\t' + stream[i].sample_id + '\n';
    }
    if (c.out.empty()) {
        out << text;
    } else {
        const fs::path target(c.out);
        if (target.has_parent_path()) ensure_directory(target.parent_path());
        write_text(target, text);
    }
    return kExitOk;
}

int cmd_evaluate(const RunConfig &c, std::ostream &out, std::ostream &err) {
    const Manifest manifest = read_manifest(require(c.manifest, "--manifest"));
    const fs::path predictions = require(c.predictions, "--predictions");
    const fs::path out_dir = require(c.out, "--out");
    require_directory(predictions, "--predictions");
    ensure_directory(out_dir);

    const EvaluationReport report = evaluate_dataset(manifest, predictions, worker_count(c));
    write_text(out_dir / "report.json", report_to_json(report));
    const std::string table = report_to_text(report);
    write_text(out_dir / "report.txt", table);
    if (c.csv) write_text(out_dir / "report.csv", report_to_csv(report));
    out << table;
    if (!report.missing_predictions.empty()) {
        err << "warning: " << report.missing_predictions.size() << " missing predictions scored as empty\n";
    }
    return kExitOk;
}

RgbImage resize_nearest(const RgbImage &img, int width, int height) {
    if (img.width() == width && img.height() == height) return img;
    Plane<Rgb8> out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int sx = static_cast<int>(static_cast<long long>(x) * img.width() / width);
            const int sy = static_cast<int>(static_cast<long long>(y) * img.height() / height);
            out(x, y) = img(sx, sy);
        }
    }
    return RgbImage(std::move(out));
}

RgbImage flow_panel(const SampleRecord &r) {
    if (r.flow_png()) return read_png_rgb(*r.flow_png());
    return uv_to_rgb(normalize_flow(read_flo(*r.flow_flo())).field);
}

int cmd_visualize(const RunConfig &c, std::ostream &out, std::ostream &) {
    const Manifest manifest = read_manifest(require(c.manifest, "--manifest"));
    const fs::path out_dir = require(c.out, "--out");
    if (manifest.empty()) throw InputError("manifest has no records");

    std::vector<const SampleRecord *> chosen;
    if (!c.ids.empty()) {
        for (const auto &id : c.ids) {
            const SampleRecord *r = manifest.find(id);
            if (!r) throw InputError("no record with sample_id '" + id + "'");
            chosen.push_back(r);
        }
    } else {
        const std::size_t n = std::min(std::max<std::size_t>(c.count, 1), manifest.size());
        std::vector<std::size_t> order(manifest.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        RngStream rng(c.seed, "visualize");
        for (std::size_t i = 0; i < n; ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);
        std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
        for (std::size_t i = 0; i < n; ++i) chosen.push_back(&manifest.records()[order[i]]);
    }

    ensure_directory(out_dir);
    for (const SampleRecord *r : chosen) {
        const RgbImage image = read_png_rgb(r->image());
        const int w = image.width();
        const int h = image.height();
        const RgbImage depth = r->depth() ? resize_nearest(depth_to_rgb(read_depth(*r->depth())), w, h)
                                          : RgbImage(Plane<Rgb8>(w, h, Rgb8{128, 128, 128}));
        const RgbImage flow = resize_nearest(flow_panel(*r), w, h);

        Plane<Rgb8> panel(3 * w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                panel(x, y) = image(x, y);
                panel(w + x, y) = depth(x, y);
                panel(2 * w + x, y) = flow(x, y);
            }
        }
        std::string name = r->sample_id();
        for (char &ch : name) {
            if (ch == '/' || ch == ':' || ch == '\\') ch = '_';
        }
        write_png_rgb(RgbImage(std::move(panel)), out_dir / (name + ".png"));
    }
    out << "rendered " << chosen.size() << " panel(s) into " << out_dir.string() << '\n';
    return kExitOk;
}

int report_error(std::ostream &err, const char *kind, const std::string &message, int code) {
    json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    err << j.dump() << '\n';
    return code;
}

struct Binding {
    CLI::Option *option;
    std::function<void(RunConfig &)> apply;
};

} // namespace

int execute(const RunConfig &config, std::ostream &out, std::ostream &err) {
    static const std::map<std::string, int (*)(const RunConfig &, std::ostream &, std::ostream &)> commands{
        {"synthesize", cmd_synthesize}, {"pair-frames", cmd_pair_frames}, {"build", cmd_build},
        {"merge", cmd_merge},           {"stats", cmd_stats},             {"sample", cmd_sample},
        {"evaluate", cmd_evaluate},     {"visualize", cmd_visualize},
    };
    try {
        const auto it = commands.find(config.subcommand);
        if (it == commands.end()) throw InputError("unknown subcommand '" + config.subcommand + "'");
        return it->second(config, out, err);
    } catch (const ConsistencyError &e) {
        return report_error(err, "consistency", e.what(), kExitConsistency);
    } catch (const FormatError &e) {
        return report_error(err, "format", e.what(), kExitInput);
    } catch (const DataError &e) {
        return report_error(err, "data", e.what(), kExitInput);
    } catch (const IoError &e) {
        return report_error(err, "io", e.what(), kExitInput);
    } catch (const Error &e) {
        return report_error(err, "input", e.what(), kExitInput);
    } catch (const fs::filesystem_error &e) {
        return report_error(err, "io", e.what(), kExitInput);
    } catch (const std::exception &e) {
        return report_error(err, "internal", e.what(), kExitInternal);
    }
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"flowsynth - synthetic image/flow/mask triplets from depth maps"};
    app.require_subcommand(1);

    RunConfig flags;
    std::string config_path;
    bool dump_config = false;
    std::vector<Binding> bindings;

    auto option = [&](CLI::App *sub, const std::string &name, auto member, const std::string &help) {
        CLI::Option *opt = sub->add_option(name, flags.*member, help);
        bindings.push_back({opt, [member, &flags](RunConfig &dst) { dst.*member = flags.*member; }});
        return opt;
    };
    auto flag = [&](CLI::App *sub, const std::string &name, bool RunConfig::*member, const std::string &help) {
        CLI::Option *opt = sub->add_flag(name, flags.*member, help);
        bindings.push_back({opt, [member, &flags](RunConfig &dst) { dst.*member = flags.*member; }});
        return opt;
    };
    auto common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "JSON config file (flags override it)");
        sub->add_flag("--dump-config", dump_config, "print the effective config as JSON and exit");
    };

    auto *synth = app.add_subcommand("synthesize", "synthesize flows for an image/depth/mask tree");
    option(synth, "--images", &RunConfig::images, "image directory");
    option(synth, "--depth", &RunConfig::depth, "depth map directory (.pfm or .png)");
    option(synth, "--masks", &RunConfig::masks, "mask directory");
    option(synth, "--out", &RunConfig::out, "output directory");
    option(synth, "--seed", &RunConfig::seed, "global seed");
    option(synth, "--alpha-min", &RunConfig::alpha_min, "lower bound of the scale draw");
    option(synth, "--workers", &RunConfig::workers, "worker threads (0 = all cores)");
    option(synth, "--format", &RunConfig::format, "flow outputs: flo, png or both");
    option(synth, "--depth-format", &RunConfig::depth_format, "detect, pfm, png8 or png16");
    common(synth);

    auto *pair = app.add_subcommand("pair-frames", "emit per-sequence frame pairings for flow estimation");
    option(pair, "--root", &RunConfig::root, "directory of sequence folders");
    option(pair, "--out", &RunConfig::out, "output directory");
    common(pair);

    auto *build = app.add_subcommand("build", "build a manifest for per-sequence video data");
    option(build, "--video-root", &RunConfig::video_root, "root holding images/, flows/, masks/");
    option(build, "--out", &RunConfig::out, "output directory");
    option(build, "--seed", &RunConfig::seed, "seed recorded in the manifest metadata");
    flag(build, "--merge-objects", &RunConfig::merge_objects, "merge multi-object labels into binary masks");
    common(build);

    auto *merge = app.add_subcommand("merge", "merge a real and a synthetic manifest");
    option(merge, "--real", &RunConfig::real, "real manifest");
    option(merge, "--synthetic", &RunConfig::synthetic, "synthetic manifest");
    option(merge, "--out", &RunConfig::out, "output manifest path");
    common(merge);

    auto *stats = app.add_subcommand("stats", "triplet and visual-context counts");
    option(stats, "--manifest", &RunConfig::manifests, "manifest path (repeatable)");
    flag(stats, "--json", &RunConfig::json, "print JSON instead of a table");
    common(stats);

    auto *sample = app.add_subcommand("sample", "dump a mixed real/synthetic sample stream");
    option(sample, "--real", &RunConfig::real, "real manifest");
    option(sample, "--synthetic", &RunConfig::synthetic, "synthetic manifest");
    option(sample, "--ratio", &RunConfig::ratio, "real:synthetic ratio, e.g. 1:3");
    option(sample, "--seed", &RunConfig::seed, "epoch seed");
    option(sample, "--length", &RunConfig::length, "stream length (0 = combined record count)");
    option(sample, "--out", &RunConfig::out, "output file (default stdout)");
    common(sample);

    auto *evaluate = app.add_subcommand("evaluate", "score predictions against manifest masks");
    option(evaluate, "--manifest", &RunConfig::manifest, "manifest");
    option(evaluate, "--predictions", &RunConfig::predictions, "predictions/<context>/<frame>.png");
    option(evaluate, "--out", &RunConfig::out, "report directory");
    option(evaluate, "--workers", &RunConfig::workers, "worker threads (0 = all cores)");
    flag(evaluate, "--csv", &RunConfig::csv, "also write report.csv");
    common(evaluate);

    auto *visualize = app.add_subcommand("visualize", "image | depth | flow panels for manifest records");
    option(visualize, "--manifest", &RunConfig::manifest, "manifest");
    option(visualize, "--out", &RunConfig::out, "panel directory");
    option(visualize, "--id", &RunConfig::ids, "sample id (repeatable)");
    option(visualize, "--count", &RunConfig::count, "records to sample when no --id is given");
    option(visualize, "--seed", &RunConfig::seed, "seed for record sampling");
    common(visualize);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return kExitInput;
    }

    RunConfig config;
    try {
        config = default_config();
        if (!config_path.empty()) config = load_config_file(std::move(config), config_path);
    } catch (const Error &e) {
        return report_error(err, "input", e.what(), kExitInput);
    }
    for (const auto &b : bindings) {
        if (b.option->count() > 0) b.apply(config);
    }
    config.subcommand = app.get_subcommands().front()->get_name();
    if (dump_config) {
        out << to_json(config).dump(2) << '\n';
        return kExitOk;
    }
    return execute(config, out, err);
}

} // namespace flowsynth::cli
