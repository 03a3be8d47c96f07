#include "noisepair/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include "json.hpp"

#include "noisepair/codec.hpp"
#include "noisepair/errors.hpp"
#include "noisepair/image_ops.hpp"
#include "noisepair/metrics.hpp"
#include "noisepair/plane_ops.hpp"
#include "noisepair/subprocess.hpp"

namespace noisepair {

using nlohmann::json;

namespace {

RasterPlane median_filter(const RasterPlane& plane, int radius) {
    const int w = plane.width();
    const int h = plane.height();
    std::vector<double> out(plane.size());
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            window.clear();
            for (int dy = -radius; dy <= radius; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    window.push_back(plane(xx, yy));
                }
            }
            auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            out[static_cast<std::size_t>(y) * w + x] = *mid;
        }
    }
    return RasterPlane(w, h, std::move(out));
}

std::string substitute(std::string text, const std::string& key, const std::string& value) {
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

MultiImage clean_pair_average(const MultiImage& ref8, const MultiImage& clean8) {
    // Published 8-bit images are integer-valued; the GT estimate averages the
    // quantized pair.
    const MultiImage ref_q = quantize_to_integers(ref8);
    const MultiImage clean_q = quantize_to_integers(clean8);
    return average_images({ref_q, clean_q});
}

struct ScenePrep {
    std::string scene_id;
    std::string camera_tag;
    MultiImage noisy_q;     // quantized aligned noisy image, what denoisers see
    MultiImage gt_average;  // (ref + clean) / 2
    double psnr_before = 0.0;
    double ssim_before = 0.0;
    int noisy_index = 0;
};

}  // namespace

MultiImage denoise_builtin(const MultiImage& image, DenoiserKind kind, double sigma) {
    if (kind == DenoiserKind::BuiltinGaussian) {
        if (!(sigma > 0.0)) {
            throw InvalidParameterError("builtin gaussian denoiser needs sigma > 0");
        }
        RasterPlane r = gaussian_blur(image.channel(0), sigma);
        RasterPlane g = gaussian_blur(image.channel(1), sigma);
        RasterPlane b = gaussian_blur(image.channel(2), sigma);
        return MultiImage(std::move(r), std::move(g), std::move(b), image.domain());
    }
    if (kind == DenoiserKind::BuiltinMedian) {
        const int radius = std::max(1, static_cast<int>(std::lround(sigma)));
        RasterPlane r = median_filter(image.channel(0), radius);
        RasterPlane g = median_filter(image.channel(1), radius);
        RasterPlane b = median_filter(image.channel(2), radius);
        return MultiImage(std::move(r), std::move(g), std::move(b), image.domain());
    }
    throw InvalidParameterError("denoise_builtin called with an external spec");
}

void validate_denoiser_spec(const DenoiserSpec& spec) {
    if (spec.name.empty()) {
        throw InvalidParameterError("denoiser spec needs a name");
    }
    if (spec.kind == DenoiserKind::External) {
        if (spec.command.find("{input}") == std::string::npos ||
            spec.command.find("{output}") == std::string::npos) {
            throw InvalidParameterError("external denoiser '" + spec.name +
                                        "' must reference {input} and {output}");
        }
    }
}

std::vector<DenoiserSpec> load_denoiser_specs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open denoiser spec " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidParameterError("denoiser spec " + path.string() + " is not valid JSON: " + e.what());
    }
    std::vector<DenoiserSpec> specs;
    for (const json& entry : doc.value("denoisers", json::array())) {
        DenoiserSpec spec;
        spec.name = entry.value("name", "");
        const std::string kind = entry.value("kind", "");
        if (kind == "builtin_gaussian") {
            spec.kind = DenoiserKind::BuiltinGaussian;
        } else if (kind == "builtin_median") {
            spec.kind = DenoiserKind::BuiltinMedian;
        } else if (kind == "external") {
            spec.kind = DenoiserKind::External;
        } else {
            throw InvalidParameterError("denoiser '" + spec.name + "' has unknown kind '" + kind + "'");
        }
        spec.command = entry.value("command", "");
        spec.timeout_seconds = entry.value("timeout_seconds", 600.0);
        spec.reentrant = entry.value("reentrant", true);
        validate_denoiser_spec(spec);
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) {
        throw InvalidParameterError("denoiser spec " + path.string() + " lists no denoisers");
    }
    return specs;
}

EvaluationReport run_denoise_eval(const std::vector<SceneManifest>& manifests,
                                  const std::vector<DenoiserSpec>& denoisers,
                                  const std::vector<double>& sigma_grid,
                                  const PipelineConfig& config,
                                  const std::filesystem::path& work_dir) {
    for (const DenoiserSpec& spec : denoisers) {
        validate_denoiser_spec(spec);
    }
    if (sigma_grid.empty()) {
        throw InvalidParameterError("run_denoise_eval: empty sigma grid");
    }
    std::filesystem::create_directories(work_dir);

    EvaluationReport report;

    // Stage 1: align and gate every scene; collect the prepared noisy images.
    std::vector<ScenePrep> prepared;
    std::vector<std::string> skipped(manifests.size());
    std::vector<std::vector<ScenePrep>> per_scene(manifests.size());
    parallel_for_indexed(manifests.size(), config.workers, [&](std::size_t i) {
        const SceneManifest& manifest = manifests[i];
        try {
            const SceneBundle bundle = load_bundle(manifest);
            if (bundle.noisy.empty()) {
                skipped[i] = manifest.scene_id + ": no noisy image";
                return;
            }
            const AlignedScene aligned = align_scene(bundle, config.alignment);
            const GateVerdict gate =
                quality_gate(aligned.reference, aligned.clean.image, config.threshold_db);
            if (!gate.pass) {
                skipped[i] = manifest.scene_id + ": failed quality gate (" +
                             format_double(gate.clean_pair_psnr) + " dB)";
                return;
            }
            const MultiImage gt_avg = clean_pair_average(aligned.reference, aligned.clean.image);
            for (std::size_t n = 0; n < aligned.noisy.size(); ++n) {
                ScenePrep prep{manifest.scene_id,
                               manifest.camera_tag,
                               quantize_to_integers(aligned.noisy[n].image),
                               gt_avg,
                               0.0,
                               0.0,
                               static_cast<int>(n)};
                const MetricResult before =
                    compute_metrics(prep.noisy_q, prep.gt_average, ReferenceKind::GtAverage);
                prep.psnr_before = before.psnr_db;
                prep.ssim_before = before.ssim;
                per_scene[i].push_back(std::move(prep));
            }
        } catch (const std::exception& e) {
            skipped[i] = manifest.scene_id + ": " + e.what();
        }
    });
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        if (!skipped[i].empty()) {
            report.skipped_scenes.push_back(skipped[i]);
        }
        for (ScenePrep& prep : per_scene[i]) {
            prepared.push_back(std::move(prep));
        }
    }

    // Stage 2: the (scene, denoiser, sigma) grid.
    struct Task {
        const ScenePrep* prep;
        const DenoiserSpec* spec;
        std::size_t spec_index;
        double sigma;
    };
    std::vector<Task> tasks;
    for (const ScenePrep& prep : prepared) {
        for (std::size_t d = 0; d < denoisers.size(); ++d) {
            for (double sigma : sigma_grid) {
                tasks.push_back(Task{&prep, &denoisers[d], d, sigma});
            }
        }
    }
    std::vector<EvalRow> rows(tasks.size());
    // One lock per denoiser so non-reentrant commands serialize only against
    // themselves.
    std::vector<std::unique_ptr<std::mutex>> denoiser_locks;
    denoiser_locks.reserve(denoisers.size());
    for (std::size_t d = 0; d < denoisers.size(); ++d) {
        denoiser_locks.push_back(std::make_unique<std::mutex>());
    }
    parallel_for_indexed(tasks.size(), config.workers, [&](std::size_t t) {
        const Task& task = tasks[t];
        EvalRow row;
        row.scene_id = task.prep->scene_id;
        row.camera_tag = task.prep->camera_tag;
        row.denoiser = task.spec->name;
        row.noisy_index = task.prep->noisy_index;
        row.sigma_param = task.sigma;
        row.psnr_before = task.prep->psnr_before;
        row.ssim_before = task.prep->ssim_before;
        try {
            MultiImage denoised = [&]() {
                if (task.spec->kind != DenoiserKind::External) {
                    return denoise_builtin(task.prep->noisy_q, task.spec->kind, task.sigma);
                }
                const std::filesystem::path input =
                    work_dir / (row.scene_id + "_" + std::to_string(task.prep->noisy_index) + "_" +
                                row.denoiser + "_" + format_double(task.sigma) + "_in.pnm");
                const std::filesystem::path output =
                    work_dir / (row.scene_id + "_" + std::to_string(task.prep->noisy_index) + "_" +
                                row.denoiser + "_" + format_double(task.sigma) + "_out.pnm");
                write_pnm8(task.prep->noisy_q, input);
                std::string command = substitute(task.spec->command, "{input}", input.string());
                command = substitute(command, "{output}", output.string());
                command = substitute(command, "{sigma}", format_double(task.sigma));
                CommandResult result;
                if (task.spec->reentrant) {
                    result = run_command(command, task.spec->timeout_seconds);
                } else {
                    std::lock_guard<std::mutex> lock(*denoiser_locks[task.spec_index]);
                    result = run_command(command, task.spec->timeout_seconds);
                }
                if (result.timed_out) {
                    throw IoError("timed out after " + format_double(task.spec->timeout_seconds) + " s");
                }
                if (result.exit_code != 0) {
                    throw IoError("exited with status " + std::to_string(result.exit_code));
                }
                return read_pnm(output);
            }();
            if (denoised.width() != task.prep->noisy_q.width() ||
                denoised.height() != task.prep->noisy_q.height()) {
                throw IoError("denoised output has wrong dimensions");
            }
            const MetricResult after =
                compute_metrics(denoised, task.prep->gt_average, ReferenceKind::GtAverage);
            row.psnr_after = after.psnr_db;
            row.ssim_after = after.ssim;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows[t] = std::move(row);
    });

    // Best row per (scene, noisy image, denoiser) by PSNR after denoising.
    std::map<std::tuple<std::string, int, std::string>, std::size_t> best_index;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].failed) {
            continue;
        }
        const auto key = std::make_tuple(rows[i].scene_id, rows[i].noisy_index, rows[i].denoiser);
        const auto it = best_index.find(key);
        if (it == best_index.end() || rows[i].psnr_after > rows[it->second].psnr_after) {
            best_index[key] = i;
        }
    }
    for (const auto& [key, index] : best_index) {
        rows[index].best_for_scene = true;
    }
    report.rows = std::move(rows);

    // Aggregates per (camera view, denoiser, sigma); "all" covers every camera.
    struct AggAcc {
        double psnr_before = 0.0;
        double psnr_after = 0.0;
        double ssim_before = 0.0;
        double ssim_after = 0.0;
        std::size_t n = 0;
    };
    std::map<std::tuple<std::string, std::string, double>, AggAcc> agg;
    for (const EvalRow& row : report.rows) {
        if (row.failed) {
            continue;
        }
        for (const std::string& view : {row.camera_tag, std::string("all")}) {
            AggAcc& acc = agg[{view, row.denoiser, row.sigma_param}];
            acc.psnr_before += row.psnr_before;
            acc.psnr_after += row.psnr_after;
            acc.ssim_before += row.ssim_before;
            acc.ssim_after += row.ssim_after;
            ++acc.n;
        }
    }
    std::map<std::pair<std::string, std::string>, std::size_t> best_agg;
    for (const auto& [key, acc] : agg) {
        EvalAggregate aggregate;
        aggregate.camera_tag = std::get<0>(key);
        aggregate.denoiser = std::get<1>(key);
        aggregate.sigma_param = std::get<2>(key);
        aggregate.scene_count = acc.n;
        const double n = static_cast<double>(acc.n);
        aggregate.mean_psnr_before = acc.psnr_before / n;
        aggregate.mean_psnr_after = acc.psnr_after / n;
        aggregate.mean_ssim_before = acc.ssim_before / n;
        aggregate.mean_ssim_after = acc.ssim_after / n;
        report.aggregates.push_back(std::move(aggregate));
    }
    for (std::size_t i = 0; i < report.aggregates.size(); ++i) {
        const EvalAggregate& a = report.aggregates[i];
        const auto key = std::make_pair(a.camera_tag, a.denoiser);
        const auto it = best_agg.find(key);
        if (it == best_agg.end() ||
            a.mean_psnr_after > report.aggregates[it->second].mean_psnr_after) {
            best_agg[key] = i;
        }
    }
    for (const auto& [key, index] : best_agg) {
        report.aggregates[index].best = true;
    }
    return report;
}

void write_eval_csv(const EvaluationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "scene_id,camera_tag,denoiser,noisy_index,sigma_param,psnr_before,psnr_after,"
           "ssim_before,ssim_after,best_for_scene,status\n";
    for (const EvalRow& row : report.rows) {
        std::string status = row.failed ? ("failed: " + row.error) : std::string("ok");
        for (char& c : status) {
            if (c == ',' || c == '\n') {
                c = ';';
            }
        }
        out << row.scene_id << "," << row.camera_tag << "," << row.denoiser << ","
            << row.noisy_index << "," << format_double(row.sigma_param) << ","
            << format_double(row.psnr_before) << "," << format_double(row.psnr_after) << ","
            << format_double(row.ssim_before) << "," << format_double(row.ssim_after) << ","
            << (row.best_for_scene ? "true" : "false") << "," << status << "\n";
    }
}

void write_eval_json(const EvaluationReport& report, const std::filesystem::path& path) {
    json doc;
    doc["schema_version"] = kReportSchemaVersion;
    json rows = json::array();
    for (const EvalRow& row : report.rows) {
        json r;
        r["scene_id"] = row.scene_id;
        r["camera_tag"] = row.camera_tag;
        r["denoiser"] = row.denoiser;
        r["noisy_index"] = row.noisy_index;
        r["sigma_param"] = row.sigma_param;
        r["psnr_before"] = row.psnr_before;
        r["psnr_after"] = row.psnr_after;
        r["ssim_before"] = row.ssim_before;
        r["ssim_after"] = row.ssim_after;
        r["best_for_scene"] = row.best_for_scene;
        if (row.failed) {
            r["error"] = row.error;
        }
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    json aggregates = json::array();
    for (const EvalAggregate& agg : report.aggregates) {
        aggregates.push_back({{"camera_tag", agg.camera_tag},
                              {"denoiser", agg.denoiser},
                              {"sigma_param", agg.sigma_param},
                              {"scene_count", agg.scene_count},
                              {"mean_psnr_before", agg.mean_psnr_before},
                              {"mean_psnr_after", agg.mean_psnr_after},
                              {"mean_ssim_before", agg.mean_ssim_before},
                              {"mean_ssim_after", agg.mean_ssim_after},
                              {"best", agg.best}});
    }
    doc["aggregates"] = std::move(aggregates);
    doc["skipped_scenes"] = report.skipped_scenes;
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << doc.dump(2) << "\n";
}

}  // namespace noisepair
