#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "noisepair/align.hpp"
#include "noisepair/noise.hpp"
#include "noisepair/scene.hpp"

namespace noisepair {

inline constexpr int kReportSchemaVersion = 1;

struct PipelineConfig {
    double threshold_db = 34.0;
    int workers = 1;
    std::uint64_t seed = 0;  // recorded in the report; estimation is deterministic
    bool write_images = true;
    bool with_curves = true;
    double curve_bin_width = 2.0;
    AlignmentConfig alignment;
};

struct ImageReport {
    std::string role;  // "clean" or "noisy"
    int index = -1;    // position within the noisy list, -1 for clean
    std::array<AlphaEstimate, 3> alpha{};
    std::vector<NoiseEstimate> estimates;
    double psnr_db = 0.0;  // decomposition-based PSNR of this image
    NoiseCurve curve;
    bool has_curve = false;
    std::string curve_note;
};

struct SceneReport {
    std::string scene_id;
    std::string camera_tag;
    std::string error;  // non-empty marks the scene failed outright
    GateVerdict gate;
    ReferenceGamma gamma;
    std::size_t valid_pixels = 0;  // saturation-mask support
    std::vector<ImageReport> images;
};

struct CameraAggregate {
    std::string camera_tag;
    std::size_t scene_count = 0;
    double mean_noisy_sigma = 0.0;
    double mean_noisy_psnr = 0.0;
    double mean_clean_sigma = 0.0;
    double mean_clean_psnr = 0.0;
};

struct BatchReport {
    std::uint64_t seed = 0;
    std::vector<SceneReport> scenes;  // sorted by scene_id
    std::vector<CameraAggregate> aggregates;  // gate-passing scenes only
};

// Per scene: average the raw groups, align, gate, run the decomposition
// estimators per noisy image and (optionally) write the aligned 8-bit images plus
// diagnostics under out_dir/<scene_id>/. One bad scene never aborts the
// batch; its report row carries the error instead.
BatchReport run_pipeline(const std::vector<SceneManifest>& manifests, const PipelineConfig& config,
                         const std::filesystem::path& out_dir);

// Gate-only variant: aligns reference and clean, skips the noisy images.
BatchReport run_gate(const std::vector<SceneManifest>& manifests, const PipelineConfig& config);

bool report_has_errors(const BatchReport& report);

void write_report_json(const BatchReport& report, const std::filesystem::path& path);
void write_report_csv(const BatchReport& report, const std::filesystem::path& path);
BatchReport read_report_json(const std::filesystem::path& path);

// Formats a double with enough digits for plotting while staying stable
// across runs.
std::string format_double(double v);

// Runs fn(0..count-1) on up to `workers` threads; exceptions propagate after
// all tasks finish. Results must be written to per-index slots by fn.
void parallel_for_indexed(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace noisepair
