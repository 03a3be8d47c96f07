#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "noisepair/align.hpp"
#include "noisepair/scene.hpp"

namespace noisepair {

// One estimate of one calibration image's noise on one channel.
struct CalibrationRow {
    std::string image_role;  // "clean", "noisy_0", "noisy_1", ...
    std::string channel;     // "r", "g", "b" or "overall"
    double true_sigma = 0.0;
    double ours_sigma = 0.0;
    double ours_rel_error = 0.0;
    double standard_sigma = 0.0;
    double standard_rel_error = 0.0;
};

struct CalibrationConfig {
    // Constant-surface scenes anchor the median to mid-gray instead of the
    // usual 99th-percentile mapping.
    AnchorSpec anchor{50.0, 128.0};
    double pseudo_gt_blur_sigma = 20.0;
    AlignmentConfig alignment;
};

// Calibration-scene evaluation: aligns the bundle with the median anchor,
// builds a pseudo ground truth per image by heavy blurring, and scores the
// decomposition estimators against the plain difference-image estimate.
std::vector<CalibrationRow> run_calibration(const SceneBundle& scene,
                                            const CalibrationConfig& config = {});

struct CalibrationSummary {
    double ours_mean_abs_rel = 0.0;
    double standard_mean_abs_rel = 0.0;
    std::size_t rows = 0;
};

CalibrationSummary summarize_calibration(const std::vector<CalibrationRow>& rows);

void write_calibration_csv(const std::vector<CalibrationRow>& rows,
                           const std::filesystem::path& path);

}  // namespace noisepair
