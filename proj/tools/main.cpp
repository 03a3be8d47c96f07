// noisepair command line: alignment, noise estimation and evaluation
// harnesses for low-light noisy/clean scene bundles.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "noisepair/calibrate.hpp"
#include "noisepair/codec.hpp"
#include "noisepair/denoise.hpp"
#include "noisepair/errors.hpp"
#include "noisepair/noise.hpp"
#include "noisepair/pipeline.hpp"
#include "noisepair/plotdata.hpp"
#include "noisepair/scene.hpp"
#include "noisepair/synth_validate.hpp"

namespace fs = std::filesystem;
using namespace noisepair;

namespace {

struct CommonOptions {
    std::string manifest;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int workers = 1;
    double threshold_db = 34.0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool manifest_required = true) {
    auto* m = cmd->add_option("--manifest", opts.manifest, "Scene manifest (JSON)");
    if (manifest_required) {
        m->required();
    }
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "RNG seed for synthetic data");
    cmd->add_option("--workers", opts.workers, "Concurrent scenes");
    cmd->add_option("--threshold-db", opts.threshold_db, "Quality-gate PSNR threshold");
}

PipelineConfig make_config(const CommonOptions& opts) {
    PipelineConfig config;
    config.threshold_db = opts.threshold_db;
    config.workers = opts.workers;
    config.seed = opts.seed;
    return config;
}

int report_scene_errors(const BatchReport& report) {
    for (const SceneReport& scene : report.scenes) {
        if (!scene.error.empty()) {
            std::cerr << "scene " << scene.scene_id << " failed: " << scene.error << "\n";
        }
    }
    return report_has_errors(report) ? 1 : 0;
}

int cmd_align(const CommonOptions& opts) {
    const std::vector<SceneManifest> manifests = load_manifest(opts.manifest);
    PipelineConfig config = make_config(opts);
    config.with_curves = false;
    const BatchReport report = run_pipeline(manifests, config, opts.out_dir);
    write_report_json(report, fs::path(opts.out_dir) / "alignment.json");
    return report_scene_errors(report);
}

int cmd_estimate(const CommonOptions& opts) {
    const std::vector<SceneManifest> manifests = load_manifest(opts.manifest);
    const PipelineConfig config = make_config(opts);
    const BatchReport report = run_pipeline(manifests, config, opts.out_dir);
    write_report_json(report, fs::path(opts.out_dir) / "report.json");
    write_report_csv(report, fs::path(opts.out_dir) / "report.csv");
    return report_scene_errors(report);
}

int cmd_gate(const CommonOptions& opts) {
    const std::vector<SceneManifest> manifests = load_manifest(opts.manifest);
    const BatchReport report = run_gate(manifests, make_config(opts));
    fs::create_directories(opts.out_dir);
    write_report_json(report, fs::path(opts.out_dir) / "gate.json");
    for (const SceneReport& scene : report.scenes) {
        if (scene.error.empty()) {
            std::cout << scene.scene_id << ": " << format_double(scene.gate.clean_pair_psnr)
                      << " dB " << (scene.gate.pass ? "pass" : "fail") << "\n";
        } else {
            std::cout << scene.scene_id << ": error\n";
        }
    }
    return report_scene_errors(report);
}

int cmd_curve(const CommonOptions& opts, double bin_width) {
    const std::vector<SceneManifest> manifests = load_manifest(opts.manifest);
    PipelineConfig config = make_config(opts);
    config.curve_bin_width = bin_width;
    config.write_images = false;
    const BatchReport report = run_pipeline(manifests, config, opts.out_dir);
    fs::create_directories(opts.out_dir);
    write_report_json(report, fs::path(opts.out_dir) / "curves.json");
    for (const SceneReport& scene : report.scenes) {
        for (const ImageReport& image : scene.images) {
            if (image.has_curve) {
                const std::string stem = "curve_" + scene.scene_id + "_" + image.role +
                                         (image.index >= 0 ? "_" + std::to_string(image.index) : "");
                write_noise_curve_csv(image.curve, fs::path(opts.out_dir) / (stem + ".csv"));
            }
        }
    }
    return report_scene_errors(report);
}

int cmd_synth_validate(const CommonOptions& opts, const std::vector<std::string>& gt_paths,
                       int trials) {
    std::vector<fs::path> paths(gt_paths.begin(), gt_paths.end());
    SynthConfig config;
    config.workers = opts.workers;
    const std::vector<SynthErrorRow> rows = run_synthetic_validation(paths, trials, opts.seed, config);
    const SynthSummary summary = summarize_synth_errors(rows);
    fs::create_directories(opts.out_dir);
    write_synth_errors_csv(rows, fs::path(opts.out_dir) / "synth_errors.csv");
    write_synth_summary_json(summary, opts.seed, fs::path(opts.out_dir) / "synth_summary.json");
    std::cout << "ours   noisy mean |rel err|: " << format_double(summary.ours_noisy_mean_abs_rel)
              << "\nours   clean mean |rel err|: " << format_double(summary.ours_clean_mean_abs_rel)
              << "\nstandard noisy mean rel err: " << format_double(summary.standard_noisy_mean_rel)
              << "\nstandard clean mean rel err: " << format_double(summary.standard_clean_mean_rel)
              << "\n";
    return 0;
}

int cmd_calibrate(const CommonOptions& opts, double anchor_percentile, double anchor_value,
                  double blur_sigma) {
    const std::vector<SceneManifest> manifests = load_manifest(opts.manifest);
    fs::create_directories(opts.out_dir);
    int status = 0;
    for (const SceneManifest& manifest : manifests) {
        try {
            const SceneBundle bundle = load_bundle(manifest);
            CalibrationConfig config;
            config.anchor = AnchorSpec{anchor_percentile, anchor_value};
            config.pseudo_gt_blur_sigma = blur_sigma;
            const std::vector<CalibrationRow> rows = run_calibration(bundle, config);
            const CalibrationSummary summary = summarize_calibration(rows);
            write_calibration_csv(rows,
                                  fs::path(opts.out_dir) / ("calibration_" + manifest.scene_id + ".csv"));
            emit_calibration_plot_data(rows, opts.out_dir);
            std::cout << manifest.scene_id
                      << ": ours mean |rel err| = " << format_double(summary.ours_mean_abs_rel)
                      << ", standard = " << format_double(summary.standard_mean_abs_rel) << "\n";
        } catch (const std::exception& e) {
            std::cerr << "scene " << manifest.scene_id << " failed: " << e.what() << "\n";
            status = 1;
        }
    }
    return status;
}

int cmd_eval(const CommonOptions& opts, const std::string& denoiser_file,
             const std::vector<std::string>& builtin_names, const std::vector<double>& sigma_grid) {
    const std::vector<SceneManifest> manifests = load_manifest(opts.manifest);
    std::vector<DenoiserSpec> denoisers;
    for (const std::string& name : builtin_names) {
        DenoiserSpec spec;
        spec.name = name;
        if (name == "builtin_gaussian") {
            spec.kind = DenoiserKind::BuiltinGaussian;
        } else if (name == "builtin_median") {
            spec.kind = DenoiserKind::BuiltinMedian;
        } else {
            throw InvalidParameterError("unknown builtin denoiser '" + name + "'");
        }
        denoisers.push_back(std::move(spec));
    }
    if (!denoiser_file.empty()) {
        for (DenoiserSpec& spec : load_denoiser_specs(denoiser_file)) {
            denoisers.push_back(std::move(spec));
        }
    }
    if (denoisers.empty()) {
        throw InvalidParameterError("no denoisers selected; use --denoiser or --denoisers");
    }
    const PipelineConfig config = make_config(opts);
    fs::create_directories(opts.out_dir);
    const EvaluationReport report = run_denoise_eval(manifests, denoisers, sigma_grid, config,
                                                     fs::path(opts.out_dir) / "work");
    write_eval_csv(report, fs::path(opts.out_dir) / "eval.csv");
    write_eval_json(report, fs::path(opts.out_dir) / "eval.json");
    for (const std::string& skipped : report.skipped_scenes) {
        std::cout << "skipped " << skipped << "\n";
    }
    for (const EvalAggregate& agg : report.aggregates) {
        if (agg.best && agg.camera_tag == "all") {
            std::cout << agg.denoiser << " best sigma " << format_double(agg.sigma_param)
                      << ": PSNR " << format_double(agg.mean_psnr_before) << " -> "
                      << format_double(agg.mean_psnr_after) << " dB\n";
        }
    }
    return 0;
}

int cmd_plot_data(const std::string& report_path, const std::string& synth_path,
                  const std::string& calib_path, const std::string& out_dir) {
    fs::create_directories(out_dir);
    if (!report_path.empty()) {
        const BatchReport report = read_report_json(report_path);
        emit_plot_data(report, out_dir);
    }
    if (!synth_path.empty()) {
        // Re-read the harness CSV into rows.
        std::ifstream in(synth_path);
        if (!in) {
            throw IoError("cannot open " + synth_path);
        }
        std::vector<SynthErrorRow> rows;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            SynthErrorRow row;
            std::size_t pos = 0;
            const auto field = [&line, &pos]() {
                const std::size_t next = line.find(',', pos);
                std::string value = line.substr(pos, next - pos);
                pos = next == std::string::npos ? line.size() : next + 1;
                return value;
            };
            row.gt_id = field();
            row.trial = std::stoi(field());
            row.image_role = field();
            row.method = field();
            row.estimate = std::stod(field());
            row.true_sigma = std::stod(field());
            row.rel_error = std::stod(field());
            rows.push_back(std::move(row));
        }
        emit_synth_plot_data(rows, out_dir);
    }
    if (!calib_path.empty()) {
        std::ifstream in(calib_path);
        if (!in) {
            throw IoError("cannot open " + calib_path);
        }
        std::vector<CalibrationRow> rows;
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            CalibrationRow row;
            std::size_t pos = 0;
            const auto field = [&line, &pos]() {
                const std::size_t next = line.find(',', pos);
                std::string value = line.substr(pos, next - pos);
                pos = next == std::string::npos ? line.size() : next + 1;
                return value;
            };
            row.image_role = field();
            row.channel = field();
            row.true_sigma = std::stod(field());
            row.ours_sigma = std::stod(field());
            row.ours_rel_error = std::stod(field());
            row.standard_sigma = std::stod(field());
            row.standard_rel_error = std::stod(field());
            rows.push_back(std::move(row));
        }
        emit_calibration_plot_data(rows, out_dir);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-light noisy/clean image-pair toolkit"};
    app.require_subcommand(1);

    CommonOptions align_opts;
    CLI::App* align = app.add_subcommand("align", "Align scenes and write 8-bit images");
    add_common(align, align_opts);

    CommonOptions estimate_opts;
    CLI::App* estimate = app.add_subcommand("estimate", "Full pipeline: align, gate, estimate");
    add_common(estimate, estimate_opts);

    CommonOptions gate_opts;
    CLI::App* gate = app.add_subcommand("gate", "Quality-gate scenes on the clean pair");
    add_common(gate, gate_opts);

    CommonOptions curve_opts;
    double curve_bin_width = 2.0;
    CLI::App* curve = app.add_subcommand("curve", "Per-intensity noise curves");
    add_common(curve, curve_opts);
    curve->add_option("--bin-width", curve_bin_width, "Intensity bin width");

    CommonOptions synth_opts;
    std::vector<std::string> gt_paths;
    int trials = 10;
    CLI::App* synth = app.add_subcommand("synth-validate", "Artificial-noise estimator validation");
    add_common(synth, synth_opts, false);
    synth->add_option("--gt", gt_paths, "16-bit ground-truth PNM images")->required();
    synth->add_option("--trials", trials, "Trials per ground truth");

    CommonOptions calib_opts;
    double anchor_percentile = 50.0;
    double anchor_value = 128.0;
    double calib_blur = 20.0;
    CLI::App* calibrate = app.add_subcommand("calibrate", "Constant-surface calibration harness");
    add_common(calibrate, calib_opts);
    calibrate->add_option("--anchor-percentile", anchor_percentile, "Anchor percentile");
    calibrate->add_option("--anchor-value", anchor_value, "Anchor 8-bit value");
    calibrate->add_option("--pseudo-gt-blur", calib_blur, "Pseudo-GT blur sigma");

    CommonOptions eval_opts;
    std::string denoiser_file;
    std::vector<std::string> builtin_names;
    std::vector<double> sigma_grid{1.0, 2.0, 3.0};
    CLI::App* eval = app.add_subcommand("eval", "Denoiser evaluation harness");
    add_common(eval, eval_opts);
    eval->add_option("--denoisers", denoiser_file, "Denoiser spec file (JSON)");
    eval->add_option("--denoiser", builtin_names, "Builtin denoiser name (repeatable)");
    eval->add_option("--sigma-grid", sigma_grid, "Noise-level parameters to sweep")->delimiter(',');

    std::string plot_report;
    std::string plot_synth;
    std::string plot_calib;
    std::string plot_out = "out";
    CLI::App* plot = app.add_subcommand("plot-data", "Emit plot-ready CSV bundles");
    plot->add_option("--report", plot_report, "Report JSON from `estimate`");
    plot->add_option("--synth-errors", plot_synth, "synth_errors.csv from `synth-validate`");
    plot->add_option("--calibration", plot_calib, "calibration CSV from `calibrate`");
    plot->add_option("--out", plot_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (align->parsed()) {
            return cmd_align(align_opts);
        }
        if (estimate->parsed()) {
            return cmd_estimate(estimate_opts);
        }
        if (gate->parsed()) {
            return cmd_gate(gate_opts);
        }
        if (curve->parsed()) {
            return cmd_curve(curve_opts, curve_bin_width);
        }
        if (synth->parsed()) {
            return cmd_synth_validate(synth_opts, gt_paths, trials);
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(calib_opts, anchor_percentile, anchor_value, calib_blur);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_opts, denoiser_file, builtin_names, sigma_grid);
        }
        if (plot->parsed()) {
            return cmd_plot_data(plot_report, plot_synth, plot_calib, plot_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
