#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowsynth/dataset.hpp"

namespace flowsynth {

struct SequenceScore {
    std::string sequence_id;
    double j_mean = 0.0;
    double f_mean = 0.0;
    double g_mean = 0.0;
    std::vector<double> j_frames;
    std::vector<double> f_frames;
};

struct SaliencyScore {
    double mae = 0.0;
    double f_beta = 0.0;
};

struct ContextReport {
    SequenceScore binary;
    SaliencyScore saliency;
    std::vector<std::string> frame_ids;
    std::size_t missing = 0;
};

struct EvaluationReport {
    std::vector<ContextReport> contexts; ///< sorted by context id
    double j_mean = 0.0;
    double f_mean = 0.0;
    double g_mean = 0.0;
    double mae = 0.0;
    double f_beta = 0.0;
    std::size_t frames = 0;
    std::vector<std::string> missing_predictions; ///< sample ids scored as empty
};

/// Prediction for a record is looked up at
/// predictions_dir/<context_id>/<mask stem>.png. It is binarized at 127
/// for J/F and read as gray/255 for MAE and F-beta. A missing prediction
/// scores as an all-zero map and is listed in the report. Frame scores
/// average per context; dataset means average over contexts.
EvaluationReport evaluate_dataset(const Manifest &manifest, const std::filesystem::path &predictions_dir,
                                  unsigned workers = 1);

std::filesystem::path prediction_path(const SampleRecord &record, const std::filesystem::path &predictions_dir);

std::string report_to_json(const EvaluationReport &report);
std::string report_to_text(const EvaluationReport &report);
std::string report_to_csv(const EvaluationReport &report);

} // namespace flowsynth
