#include "flowsynth/evaluate.hpp"

#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "flowsynth/metrics.hpp"
#include "flowsynth/raster_io.hpp"

namespace flowsynth {
namespace fs = std::filesystem;

namespace {

struct FrameScore {
    double j = 0.0;
    double f = 0.0;
    double mae = 0.0;
    double f_beta = 0.0;
    bool missing = false;
};

double mean_of(const std::vector<double> &v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

FrameScore score_frame(const SampleRecord &record, const fs::path &predictions_dir) {
    const BinaryMask gt = read_mask(record.mask());
    const fs::path pred_path = prediction_path(record, predictions_dir);
    FrameScore s;
    std::error_code ec;
    if (!fs::is_regular_file(pred_path, ec)) {
        s.missing = true;
        const BinaryMask empty(Plane<std::uint8_t>(gt.width(), gt.height(), 0));
        s.j = region_j(empty, gt);
        s.f = boundary_f(empty, gt);
        s.mae = mae(to_saliency(empty), gt);
        s.f_beta = f_beta(to_saliency(empty), gt);
        return s;
    }
    const BinaryMask pred = read_mask(pred_path);
    const SaliencyMap saliency = read_saliency(pred_path);
    s.j = region_j(pred, gt);
    s.f = boundary_f(pred, gt);
    s.mae = mae(saliency, gt);
    s.f_beta = f_beta(saliency, gt);
    return s;
}

} // namespace

fs::path prediction_path(const SampleRecord &record, const fs::path &predictions_dir) {
    return predictions_dir / record.context_id() / (record.mask().stem().string() + ".png");
}

EvaluationReport evaluate_dataset(const Manifest &manifest, const fs::path &predictions_dir, unsigned workers) {
    const auto &records = manifest.records();
    std::vector<FrameScore> scores(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) { scores[i] = score_frame(records[i], predictions_dir); });

    std::map<std::string, std::vector<std::size_t>> by_context;
    for (std::size_t i = 0; i < records.size(); ++i) by_context[records[i].context_id()].push_back(i);

    EvaluationReport report;
    std::vector<double> j_seq, f_seq, mae_seq, fb_seq;
    for (const auto &[context, indices] : by_context) {
        ContextReport c;
        c.binary.sequence_id = context;
        std::vector<double> mae_frames, fb_frames;
        for (std::size_t i : indices) {
            const FrameScore &s = scores[i];
            c.frame_ids.push_back(records[i].sample_id());
            c.binary.j_frames.push_back(s.j);
            c.binary.f_frames.push_back(s.f);
            mae_frames.push_back(s.mae);
            fb_frames.push_back(s.f_beta);
            if (s.missing) {
                ++c.missing;
                report.missing_predictions.push_back(records[i].sample_id());
            }
        }
        c.binary.j_mean = mean_of(c.binary.j_frames);
        c.binary.f_mean = mean_of(c.binary.f_frames);
        c.binary.g_mean = g_mean(c.binary.j_mean, c.binary.f_mean);
        c.saliency = {mean_of(mae_frames), mean_of(fb_frames)};
        j_seq.push_back(c.binary.j_mean);
        f_seq.push_back(c.binary.f_mean);
        mae_seq.push_back(c.saliency.mae);
        fb_seq.push_back(c.saliency.f_beta);
        report.contexts.push_back(std::move(c));
    }
    report.j_mean = mean_of(j_seq);
    report.f_mean = mean_of(f_seq);
    report.g_mean = g_mean(report.j_mean, report.f_mean);
    report.mae = mean_of(mae_seq);
    report.f_beta = mean_of(fb_seq);
    report.frames = records.size();
    return report;
}

std::string report_to_json(const EvaluationReport &report) {
    using json = nlohmann::ordered_json;
    json j;
    j["summary"] = {{"contexts", report.contexts.size()},
                    {"frames", report.frames},
                    {"J_mean", report.j_mean},
                    {"F_mean", report.f_mean},
                    {"G_mean", report.g_mean},
                    {"MAE", report.mae},
                    {"F_beta", report.f_beta},
                    {"missing_predictions", report.missing_predictions.size()}};
    j["missing"] = report.missing_predictions;
    json contexts = json::array();
    for (const auto &c : report.contexts) {
        json frames = json::array();
        for (std::size_t i = 0; i < c.frame_ids.size(); ++i) {
            frames.push_back({{"sample_id", c.frame_ids[i]}, {"J", c.binary.j_frames[i]}, {"F", c.binary.f_frames[i]}});
        }
        contexts.push_back({{"context_id", c.binary.sequence_id},
                            {"J_mean", c.binary.j_mean},
                            {"F_mean", c.binary.f_mean},
                            {"G_mean", c.binary.g_mean},
                            {"MAE", c.saliency.mae},
                            {"F_beta", c.saliency.f_beta},
                            {"missing", c.missing},
                            {"frames", frames}});
    }
    j["contexts"] = contexts;
    return j.dump(2) + "\n";
}

std::string report_to_text(const EvaluationReport &report) {
    std::size_t w = std::string("context").size();
    for (const auto &c : report.contexts) w = std::max(w, c.binary.sequence_id.size());
    w = std::max(w, std::string("MEAN").size());
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    auto row = [&](const std::string &name, std::size_t frames, double g, double j, double f, double m, double fb) {
        out << std::left << std::setw(static_cast<int>(w)) << name << std::right << std::setw(8) << frames
            << std::setw(9) << g << std::setw(9) << j << std::setw(9) << f << std::setw(9) << m << std::setw(9) << fb
            << '\n';
    };
    out << std::left << std::setw(static_cast<int>(w)) << "context" << std::right << std::setw(8) << "frames"
        << std::setw(9) << "G" << std::setw(9) << "J" << std::setw(9) << "F" << std::setw(9) << "MAE"
        << std::setw(9) << "Fbeta" << '\n';
    for (const auto &c : report.contexts) {
        row(c.binary.sequence_id, c.frame_ids.size(), c.binary.g_mean, c.binary.j_mean, c.binary.f_mean,
            c.saliency.mae, c.saliency.f_beta);
    }
    row("MEAN", report.frames, report.g_mean, report.j_mean, report.f_mean, report.mae, report.f_beta);
    if (!report.missing_predictions.empty()) {
        out << "missing predictions: " << report.missing_predictions.size() << '\n';
    }
    return out.str();
}

std::string report_to_csv(const EvaluationReport &report) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "context_id,frames,G_mean,J_mean,F_mean,MAE,F_beta,missing\n";
    for (const auto &c : report.contexts) {
        out << c.binary.sequence_id << ',' << c.frame_ids.size() << ',' << c.binary.g_mean << ',' << c.binary.j_mean
            << ',' << c.binary.f_mean << ',' << c.saliency.mae << ',' << c.saliency.f_beta << ',' << c.missing << '\n';
    }
    return out.str();
}

} // namespace flowsynth
