#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "noisepair/pipeline.hpp"
#include "noisepair/raster.hpp"
#include "noisepair/scene.hpp"

namespace noisepair {

enum class DenoiserKind { BuiltinGaussian, BuiltinMedian, External };

// A denoiser under evaluation. The builtin gaussian interprets the sigma
// parameter as the spatial blur sigma, the builtin median as the window
// radius. External commands receive {input}, {output} and {sigma}
// placeholders and speak 8-bit P6 PNM on both sides.
struct DenoiserSpec {
    std::string name;
    DenoiserKind kind = DenoiserKind::BuiltinGaussian;
    std::string command;
    double timeout_seconds = 600.0;
    bool reentrant = true;  // non-reentrant external commands are serialized
};

std::vector<DenoiserSpec> load_denoiser_specs(const std::filesystem::path& path);
void validate_denoiser_spec(const DenoiserSpec& spec);

struct EvalRow {
    std::string scene_id;
    std::string camera_tag;
    std::string denoiser;
    int noisy_index = 0;  // which noisy image of the scene this row evaluates
    double sigma_param = 0.0;
    double psnr_before = 0.0;
    double psnr_after = 0.0;
    double ssim_before = 0.0;
    double ssim_after = 0.0;
    bool failed = false;
    std::string error;
    bool best_for_scene = false;  // argmax psnr_after per (scene, denoiser)
};

struct EvalAggregate {
    std::string camera_tag;  // "all" for the global view
    std::string denoiser;
    double sigma_param = 0.0;
    std::size_t scene_count = 0;
    double mean_psnr_before = 0.0;
    double mean_psnr_after = 0.0;
    double mean_ssim_before = 0.0;
    double mean_ssim_after = 0.0;
    bool best = false;  // best sigma within this (camera_tag, denoiser) view
};

struct EvaluationReport {
    std::vector<EvalRow> rows;
    std::vector<EvalAggregate> aggregates;
    std::vector<std::string> skipped_scenes;  // "<scene_id>: reason"
};

MultiImage denoise_builtin(const MultiImage& image, DenoiserKind kind, double sigma);

// For each gated scene and each (denoiser, sigma): denoise the quantized
// noisy image and compute PSNR/SSIM against the clean-pair average. Failed
// external invocations mark their row and the batch continues.
EvaluationReport run_denoise_eval(const std::vector<SceneManifest>& manifests,
                                  const std::vector<DenoiserSpec>& denoisers,
                                  const std::vector<double>& sigma_grid,
                                  const PipelineConfig& config,
                                  const std::filesystem::path& work_dir);

void write_eval_csv(const EvaluationReport& report, const std::filesystem::path& path);
void write_eval_json(const EvaluationReport& report, const std::filesystem::path& path);

}  // namespace noisepair
