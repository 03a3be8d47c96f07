#include "noisepair/calibrate.hpp"

#include <cmath>
#include <fstream>

#include "noisepair/errors.hpp"
#include "noisepair/noise.hpp"
#include "noisepair/pipeline.hpp"

namespace noisepair {

namespace {

const char* kChannelNames[4] = {"r", "g", "b", "overall"};

double pick(const NoiseEstimate& est, int channel) {
    return channel < 3 ? est.sigma[static_cast<std::size_t>(channel)] : est.overall;
}

void append_rows(std::vector<CalibrationRow>& rows, const std::string& role,
                 const NoiseEstimate& truth, const NoiseEstimate& ours,
                 const NoiseEstimate& standard) {
    for (int c = 0; c < 4; ++c) {
        CalibrationRow row;
        row.image_role = role;
        row.channel = kChannelNames[c];
        row.true_sigma = pick(truth, c);
        row.ours_sigma = pick(ours, c);
        row.standard_sigma = pick(standard, c);
        if (row.true_sigma > 0.0) {
            row.ours_rel_error = (row.ours_sigma - row.true_sigma) / row.true_sigma;
            row.standard_rel_error = (row.standard_sigma - row.true_sigma) / row.true_sigma;
        }
        rows.push_back(std::move(row));
    }
}

}  // namespace

std::vector<CalibrationRow> run_calibration(const SceneBundle& scene,
                                            const CalibrationConfig& config) {
    AlignmentConfig align_cfg = config.alignment;
    align_cfg.anchor = config.anchor;
    const AlignedScene aligned = align_scene(scene, align_cfg);

    std::vector<const MultiImage*> mask_inputs{&aligned.reference, &aligned.clean.image};
    for (const AlignedImage& noisy : aligned.noisy) {
        mask_inputs.push_back(&noisy.image);
    }
    const PixelMask mask = saturation_mask(mask_inputs);
    if (mask.count() == 0) {
        throw InsufficientSupportError("calibration scene is fully saturated");
    }

    std::vector<CalibrationRow> rows;
    // The clean image: truth from its own blurred pseudo ground truth, our
    // estimate from the clean-pair decomposition, the baseline from the plain
    // reference difference.
    {
        const NoiseEstimate truth = sigma_blurred_reference(
            aligned.clean.image, aligned.clean.image, config.pseudo_gt_blur_sigma, &mask);
        const NoiseEstimate ours = sigma_clean(aligned.reference, aligned.clean.image, &mask);
        const NoiseEstimate standard = sigma_standard(aligned.clean.image, aligned.reference, &mask);
        append_rows(rows, "clean", truth, ours, standard);
    }
    for (std::size_t i = 0; i < aligned.noisy.size(); ++i) {
        const MultiImage& noisy = aligned.noisy[i].image;
        const NoiseEstimate truth =
            sigma_blurred_reference(noisy, noisy, config.pseudo_gt_blur_sigma, &mask);
        const NoiseEstimate ours = sigma_noisy(noisy, aligned.reference, aligned.clean.image, &mask);
        const NoiseEstimate standard = sigma_standard(noisy, aligned.reference, &mask);
        append_rows(rows, "noisy_" + std::to_string(i), truth, ours, standard);
    }
    return rows;
}

CalibrationSummary summarize_calibration(const std::vector<CalibrationRow>& rows) {
    CalibrationSummary summary;
    for (const CalibrationRow& row : rows) {
        summary.ours_mean_abs_rel += std::fabs(row.ours_rel_error);
        summary.standard_mean_abs_rel += std::fabs(row.standard_rel_error);
    }
    if (!rows.empty()) {
        summary.ours_mean_abs_rel /= static_cast<double>(rows.size());
        summary.standard_mean_abs_rel /= static_cast<double>(rows.size());
    }
    summary.rows = rows.size();
    return summary;
}

void write_calibration_csv(const std::vector<CalibrationRow>& rows,
                           const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "image,channel,true_sigma,ours_sigma,ours_rel_error,standard_sigma,standard_rel_error\n";
    for (const CalibrationRow& row : rows) {
        out << row.image_role << "," << row.channel << "," << format_double(row.true_sigma) << ","
            << format_double(row.ours_sigma) << "," << format_double(row.ours_rel_error) << ","
            << format_double(row.standard_sigma) << "," << format_double(row.standard_rel_error)
            << "\n";
    }
}

}  // namespace noisepair
