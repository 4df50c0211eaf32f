// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "flowsynth/dataset.hpp"
#include "flowsynth/evaluate.hpp"
#include "flowsynth/flow_render.hpp"
#include "flowsynth/manifest_io.hpp"
#include "flowsynth/metrics.hpp"
#include "flowsynth/motion_synth.hpp"
#include "flowsynth/raster_io.hpp"
#include "oracles/metric_oracles.hpp"
#include "oracles/reference_colorcode.hpp"
#include "oracles/synthesis_oracle.hpp"
#include "support/test_support.hpp"

using namespace flowsynth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Collects the first failure message; later ones only bump the count.
class Checker {
public:
    void expect(bool ok, const std::string &what) {
        if (ok) return;
        if (failures_++ == 0) first_ = what;
    }
    Outcome outcome(const std::string &summary) const {
        if (failures_ == 0) return {true, summary};
        return {false, std::to_string(failures_) + " failure(s), first: " + first_};
    }

private:
    std::size_t failures_ = 0;
    std::string first_;
};

std::string fmt(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

// 1 ------------------------------------------------------------------------
Outcome range_invariants() {
    Checker c;
    std::mt19937_64 rng(1);
    double worst_norm = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int w = 4 + static_cast<int>(rng() % 29), h = 4 + static_cast<int>(rng() % 29);
        const DepthMap raw = testing::random_raw_depth(rng, w, h);
        const SynthParams p = draw_params(2024, "range/" + std::to_string(i));
        const DepthMap d = normalize_depth(raw).depth;
        for (const AxisParams &axis : {p.x(), p.y()}) {
            const MotionPlane m1 = reverse_depth(d, axis.reverse);
            const MotionPlane m2 = shift_motion(m1, axis.shift);
            const MotionPlane m3 = scale_motion(m2, axis.scale);
            for (float v : m1.plane().values()) c.expect(std::fabs(v) <= 1.0f + 1e-6f, "m1 out of [-1, 1]");
            for (float v : m2.plane().values()) c.expect(std::fabs(v) <= 2.0f + 1e-6f, "m2 out of [-2, 2]");
            for (float v : m3.plane().values()) c.expect(std::fabs(v) <= 2.0f + 1e-6f, "m3 out of [-2, 2]");
        }
        const NormalizedFlow n = normalize_flow(synthesize_motion(d, p));
        if (!n.degenerate) {
            const double dev = std::fabs(n.field.max_abs_component() - 1.0);
            worst_norm = std::max(worst_norm, dev);
            c.expect(dev <= 1e-6, "normalized max component deviates from 1 in draw " + std::to_string(i));
        }
    }
    return c.outcome("1000 draws, worst |max component - 1| = " + fmt(worst_norm));
}

// 2 ------------------------------------------------------------------------
Outcome synthesis_oracle() {
    Checker c;
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const DepthMap raw = testing::random_raw_depth(rng, 16, 16);
        const SynthParams p = testing::random_params(rng);
        const MotionField f = synthesize_motion(normalize_depth(raw).depth, p);
        const std::vector<double> values(raw.plane().values().begin(), raw.plane().values().end());
        const auto d = oracle::min_max_normalize(values);
        const auto u = oracle::motion_axis(d, {p.x().reverse ? 1 : 0, p.x().shift, p.x().scale});
        const auto v = oracle::motion_axis(d, {p.y().reverse ? 1 : 0, p.y().shift, p.y().scale});
        for (std::size_t k = 0; k < u.size(); ++k) {
            worst = std::max({worst, std::fabs(f.u().values()[k] - u[k]), std::fabs(f.v().values()[k] - v[k])});
        }
    }
    c.expect(worst <= 1e-6, "max elementwise difference " + fmt(worst));
    return c.outcome("100 inputs of 16x16, max |diff| = " + fmt(worst));
}

// 3 ------------------------------------------------------------------------
Outcome color_wheel_oracle() {
    Checker c;
    const oracle::MiddleburyColorCode code;
    auto reference = [&](float u, float v) {
        unsigned char pix[3];
        code.computeColor(u, v, pix);
        return Rgb8{pix[0], pix[1], pix[2]};
    };
    std::mt19937_64 rng(3);
    std::size_t mismatched = 0;
    for (int i = 0; i < 20; ++i) {
        const MotionField f = testing::random_normalized_field(rng, 32, 32);
        const FlowRgb rgb = uv_to_rgb(f);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) mismatched += rgb(x, y) == reference(f.u()(x, y), f.v()(x, y)) ? 0 : 1;
    }
    c.expect(mismatched == 0, std::to_string(mismatched) + " pixels differ from the reference");
    const auto fixed = [](float u, float v) {
        return uv_to_rgb(MotionField(Plane<float>(1, 1, u), Plane<float>(1, 1, v), MotionStage::normalized))(0, 0);
    };
    c.expect(fixed(0.0f, 0.0f) == Rgb8{255, 255, 255}, "(0,0) is not white");
    c.expect(fixed(1.0f, 0.0f) == Rgb8{255, 0, 0}, "(1,0) is not pure red");
    c.expect(reference(0.0f, 0.0f) == Rgb8{255, 255, 255}, "reference (0,0) is not white");
    c.expect(reference(1.0f, 0.0f) == Rgb8{255, 0, 0}, "reference (1,0) is not pure red");
    return c.outcome("20 fields of 32x32 pixel-exact, (0,0) white, (1,0) red");
}

// 4 ------------------------------------------------------------------------
bool stats_equal(const DatasetStats &s, std::size_t triplets, std::size_t contexts) {
    return s.n_triplets == triplets && s.n_contexts == contexts;
}

Outcome table_bookkeeping() {
    Checker c;
    testing::TempDir dir("flowsynth-acc4");

    // full-size manifests, round-tripped through the JSONL format
    write_manifest(testing::make_real_manifest(testing::spread(2079, 30)), dir / "real.jsonl");
    write_manifest(testing::make_synthetic_manifest(15572), dir / "synthetic.jsonl");
    const Manifest real = read_manifest(dir / "real.jsonl");
    const Manifest synthetic = read_manifest(dir / "synthetic.jsonl");
    const Manifest mixed = merge_manifests(real, synthetic);
    const DatasetStats r = compute_stats(real), s = compute_stats(synthetic), m = compute_stats(mixed);
    c.expect(stats_equal(r, 2079, 30), "Real row is " + std::to_string(r.n_triplets) + "/" + std::to_string(r.n_contexts));
    c.expect(stats_equal(s, 15572, 15572),
             "Synthetic row is " + std::to_string(s.n_triplets) + "/" + std::to_string(s.n_contexts));
    c.expect(stats_equal(m, 17651, 15602), "Mixed row is " + std::to_string(m.n_triplets) + "/" + std::to_string(m.n_contexts));
    const std::string table = format_stats_table({{"Real", r}, {"Synthetic", s}, {"Mixed", m}});
    c.expect(table.find("17,651") != std::string::npos && table.find("15,602") != std::string::npos,
             "formatted table lacks the mixed counts");

    // desk scale, built from files on disk
    testing::write_video_fixture(dir / "video", {5, 5});
    testing::write_flat_fixture(dir / "flat", 12);
    RealBuildOptions ro;
    ro.video_root = dir / "video";
    SyntheticBuildOptions so;
    so.image_dir = dir / "flat" / "images";
    so.depth_dir = dir / "flat" / "depth";
    so.mask_dir = dir / "flat" / "masks";
    so.output_dir = dir / "syn";
    const Manifest desk_real = build_real_manifest(ro);
    const Manifest desk_syn = build_synthetic_manifest(so).manifest;
    const DatasetStats dr = compute_stats(desk_real), ds = compute_stats(desk_syn),
                       dm = compute_stats(merge_manifests(desk_real, desk_syn));
    c.expect(stats_equal(dr, 10, 2), "desk real is " + std::to_string(dr.n_triplets) + "/" + std::to_string(dr.n_contexts));
    c.expect(stats_equal(ds, 12, 12), "desk synthetic is " + std::to_string(ds.n_triplets) + "/" + std::to_string(ds.n_contexts));
    c.expect(stats_equal(dm, 22, 14), "desk mixed is " + std::to_string(dm.n_triplets) + "/" + std::to_string(dm.n_contexts));
    return c.outcome("Real 2,079/30, Synthetic 15,572/15,572, Mixed 17,651/15,602; desk (10;2) (12;12) (22;14)");
}

// 5 ------------------------------------------------------------------------
Outcome flo_round_trip() {
    Checker c;
    testing::TempDir dir("flowsynth-acc5");
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const int w = 1 + static_cast<int>(rng() % 48), h = 1 + static_cast<int>(rng() % 48);
        const MotionField f(testing::random_plane(rng, w, h, -300.0f, 300.0f),
                            testing::random_plane(rng, w, h, -300.0f, 300.0f), MotionStage::raw);
        const fs::path p = dir / ("f" + std::to_string(i) + ".flo");
        write_flo(f, p);
        const MotionField g = read_flo(p);
        c.expect(g == f, "field " + std::to_string(i) + " differs after round trip");
        c.expect(testing::file_bytes(p).size() == 12 + 8 * static_cast<std::size_t>(w * h), "unexpected file size");
    }
    const fs::path ref = fs::path(FLOWSYNTH_TEST_DATA_DIR) / "reference_4x3.flo";
    const MotionField r = read_flo(ref);
    c.expect(r.width() == 4 && r.height() == 3, "reference dimensions");
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x) {
            c.expect(r.u()(x, y) == static_cast<float>(0.5 * x - 0.25 * y), "reference u value");
            c.expect(r.v()(x, y) == static_cast<float>(-1.5 + 0.125 * (x + 4 * y)), "reference v value");
        }
    c.expect(encode_flo(r) == testing::file_bytes(ref), "re-encoding the reference changes its bytes");
    return c.outcome("100 random fields bit-exact; third-party reference file matches");
}

// 6 ------------------------------------------------------------------------
Outcome metrics_oracle() {
    Checker c;
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) {
        const int w = 1 + static_cast<int>(rng() % 24), h = 1 + static_cast<int>(rng() % 24);
        const bool blobs = i % 2 == 0;
        const BinaryMask a = blobs ? testing::random_blob_mask(rng, w, h) : testing::random_noise_mask(rng, w, h, 0.35);
        const BinaryMask b = blobs ? testing::random_blob_mask(rng, w, h) : testing::random_noise_mask(rng, w, h, 0.35);
        const auto ga = oracle::grid_from({a.plane().values().begin(), a.plane().values().end()}, w, h);
        const auto gb = oracle::grid_from({b.plane().values().begin(), b.plane().values().end()}, w, h);
        const std::string tag = " (pair " + std::to_string(i) + ", " + std::to_string(w) + "x" + std::to_string(h) + ")";
        c.expect(region_j(a, b) == oracle::jaccard(ga, gb), "region_j" + tag);
        c.expect(boundary_f(a, b) == oracle::boundary_f(ga, gb), "boundary_f" + tag);

        const SaliencyMap pred(testing::random_plane(rng, w, h, 0.0f, 1.0f));
        const std::vector<float> pv(pred.plane().values().begin(), pred.plane().values().end());
        const std::vector<std::uint8_t> bv(b.plane().values().begin(), b.plane().values().end());
        c.expect(f_beta(pred, b) == oracle::f_beta_sweep(pv, bv), "f_beta" + tag);
    }
    const double g = 100.0 * g_mean(0.880, 0.890);
    c.expect(std::fabs(g - 88.5) <= 0.05, "g_mean(88.0, 89.0) = " + fmt(g));
    return c.outcome("200 pairs exact for J, F, F-beta; G(88.0, 89.0) = " + fmt(g, 4));
}

// 7 ------------------------------------------------------------------------
Outcome mixing_sampler() {
    Checker c;
    const Manifest real = testing::make_real_manifest(testing::spread(2079, 30));
    const Manifest synthetic = testing::make_synthetic_manifest(15572);
    std::mt19937_64 rng(7);
    std::size_t windows = 0;
    for (int s = 0; s < 10; ++s) {
        const std::uint64_t seed = rng();
        const auto stream = mixed_sampler(real, synthetic, {1, 3}, seed);
        c.expect(stream.size() == 17651, "stream length " + std::to_string(stream.size()));
        std::size_t in_window = 0;
        for (std::size_t i = 0; i < stream.size(); ++i) {
            in_window += stream[i].source == SampleSource::real ? 1 : 0;
            if (i >= 4) in_window -= stream[i - 4].source == SampleSource::real ? 1 : 0;
            if (i >= 3) {
                ++windows;
                c.expect(in_window == 1, "window at " + std::to_string(i - 3) + " holds " + std::to_string(in_window) +
                                             " real samples (seed " + std::to_string(seed) + ")");
            }
        }
    }
    return c.outcome("10 epoch seeds, " + std::to_string(windows) + " windows of 4 each with exactly 1 real");
}

// 8 ------------------------------------------------------------------------
int run_synthesize(const fs::path &in, const fs::path &out, const std::string &workers) {
    const std::vector<std::string> args{"flowsynth", "synthesize",      "--images", (in / "images").string(),
                                        "--depth",   (in / "depth").string(), "--masks",  (in / "masks").string(),
                                        "--out",     out.string(),      "--seed",   "8",
                                        "--workers", workers};
    std::vector<const char *> argv;
    for (const auto &a : args) argv.push_back(a.c_str());
    std::ostringstream sink_out, sink_err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), sink_out, sink_err);
}

Outcome determinism() {
    Checker c;
    testing::TempDir dir("flowsynth-acc8");
    testing::write_flat_fixture(dir / "in", 50, 32, 24);
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    const std::vector<std::pair<std::string, std::string>> runs{{"a", "4"}, {"b", "4"}, {"c", "1"}, {"d", "7"}};
    for (const auto &[name, workers] : runs) c.expect(run_synthesize(dir / "in", dir / name, workers) == 0, "synthesize failed");
    ::unsetenv("SOURCE_DATE_EPOCH");

    std::size_t compared = 0;
    for (const auto &[name, workers] : runs) {
        if (name == "a") continue;
        for (const char *file : {"manifest.jsonl", "manifest.meta.json"}) {
            c.expect(testing::file_bytes(dir / "a" / file) == testing::file_bytes(dir / name / file),
                     std::string(file) + " differs in run " + name);
            ++compared;
        }
        std::size_t flows = 0;
        for (const auto &e : fs::directory_iterator(dir / "a" / "flows")) {
            c.expect(testing::file_bytes(e.path()) == testing::file_bytes(dir / name / "flows" / e.path().filename()),
                     e.path().filename().string() + " differs in run " + name);
            ++flows;
            ++compared;
        }
        c.expect(flows == 100, "expected 50 .flo + 50 .png, found " + std::to_string(flows));
    }
    return c.outcome("50 images, workers 4/4/1/7, " + std::to_string(compared) + " files byte-identical");
}

// 9 ------------------------------------------------------------------------
Outcome end_to_end_smoke() {
    Checker c;
    testing::TempDir dir("flowsynth-acc9");
    const fs::path depth_dir = dir / "depth", gt_dir = dir / "masks", pred_dir = dir / "pred", flow_dir = dir / "flows";
    for (const auto &d : {depth_dir, gt_dir, pred_dir, flow_dir}) fs::create_directories(d);

    // Bimodal depth: a near blob (large value) over a far background, both noisy.
    // The camera is taken to translate, so nearer pixels move faster: r = 0 and
    // a positive shift put the near mode on the larger flow magnitude.
    constexpr int kImages = 20, kW = 64, kH = 48;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> noise(-0.06f, 0.06f);
    std::vector<SampleRecord> records;
    for (int i = 0; i < kImages; ++i) {
        const std::string stem = "bimodal_" + std::to_string(i);
        const int cx = 16 + static_cast<int>(rng() % 32), cy = 12 + static_cast<int>(rng() % 24);
        const int rx = 6 + static_cast<int>(rng() % 10), ry = 5 + static_cast<int>(rng() % 8);
        Plane<float> depth(kW, kH);
        Plane<std::uint8_t> fg(kW, kH, 0);
        for (int y = 0; y < kH; ++y)
            for (int x = 0; x < kW; ++x) {
                const double ex = static_cast<double>(x - cx) / rx, ey = static_cast<double>(y - cy) / ry;
                const bool near = ex * ex + ey * ey <= 1.0;
                fg(x, y) = near ? 1 : 0;
                depth(x, y) = 100.0f * ((near ? 0.8f : 0.2f) + noise(rng));
            }
        write_pfm(depth, depth_dir / (stem + ".pfm"));
        write_mask(BinaryMask(std::move(fg)), gt_dir / (stem + ".png"));

        RngStream draw(9, stem);
        const AxisParams ax{false, static_cast<float>(draw.uniform(0.25, 1.0)), static_cast<float>(draw.uniform(0.5, 1.0))};
        const AxisParams ay{false, static_cast<float>(draw.uniform(0.25, 1.0)), static_cast<float>(draw.uniform(0.5, 1.0))};
        const SynthParams params(ax, ay, draw.seed());

        // synthesize -> persist -> reload -> segment
        const RenderResult rendered = render_pipeline(read_depth(depth_dir / (stem + ".pfm")), params);
        write_flo(rendered.flow, flow_dir / (stem + ".flo"));
        write_png_rgb(rendered.rgb, flow_dir / (stem + ".png"));
        const BinaryMask predicted = baseline_segment(read_flo(flow_dir / (stem + ".flo")));
        fs::create_directories(pred_dir / stem);
        write_mask(predicted, pred_dir / stem / (stem + ".png"));

        SampleRecordFields f;
        f.sample_id = std::string(kSyntheticIdPrefix) + stem;
        f.image = flow_dir / (stem + ".png");
        f.depth = depth_dir / (stem + ".pfm");
        f.flow_flo = flow_dir / (stem + ".flo");
        f.flow_png = flow_dir / (stem + ".png");
        f.mask = gt_dir / (stem + ".png");
        f.context_id = stem;
        f.params = params;
        records.emplace_back(std::move(f));
    }
    const EvaluationReport report = evaluate_dataset(Manifest(std::move(records), {}), pred_dir, 2);
    double worst = 1.0;
    for (const auto &ctx : report.contexts) worst = std::min(worst, ctx.binary.j_mean);
    c.expect(report.missing_predictions.empty(), "predictions missing");
    c.expect(report.frames == kImages, "frame count");
    c.expect(report.j_mean > 0.9, "J mean " + fmt(report.j_mean));
    return c.outcome(std::to_string(kImages) + " images, J mean " + fmt(report.j_mean, 4) + " (worst " + fmt(worst, 4) +
                     "), F mean " + fmt(report.f_mean, 4));
}

struct Criterion {
    int id;
    const char *name;
    std::function<Outcome()> run;
    double time_limit_s; // <= 0: none
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "range invariants", range_invariants, 10.0},
        {2, "synthesis oracle equivalence", synthesis_oracle, 0},
        {3, "color wheel oracle equivalence", color_wheel_oracle, 0},
        {4, "dataset bookkeeping table", table_bookkeeping, 0},
        {5, ".flo round trip", flo_round_trip, 0},
        {6, "metrics oracle equivalence", metrics_oracle, 0},
        {7, "mixing sampler windows", mixing_sampler, 0},
        {8, "determinism", determinism, 0},
        {9, "end-to-end smoke", end_to_end_smoke, 30.0},
    };
    int failed = 0;
    for (const auto &criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criterion.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.time_limit_s > 0 && seconds >= criterion.time_limit_s) {
            o.pass = false;
            o.detail += "; took " + fmt(seconds, 3) + " s, limit " + fmt(criterion.time_limit_s, 3) + " s";
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] criterion %d: %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", criterion.id, criterion.name,
                    o.detail.c_str(), seconds);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
