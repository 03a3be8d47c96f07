#include "noisepair/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "noisepair/codec.hpp"
#include "noisepair/errors.hpp"
#include "noisepair/image_ops.hpp"
#include "noisepair/metrics.hpp"

namespace noisepair {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void parallel_for_indexed(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (count == 0) {
        return;
    }
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        threads.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (std::thread& t : threads) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

namespace {

AlignmentConfig effective_alignment(const AlignmentConfig& base, const AlignmentOverrides& overrides) {
    AlignmentConfig cfg = base;
    if (overrides.anchor_percentile) {
        cfg.anchor.percentile = *overrides.anchor_percentile;
    }
    if (overrides.anchor_value) {
        cfg.anchor.value = *overrides.anchor_value;
    }
    if (overrides.per_channel_alpha) {
        cfg.per_channel_alpha = *overrides.per_channel_alpha;
    }
    return cfg;
}

void write_scene_outputs(const std::filesystem::path& out_dir, const SceneReport& report,
                         const AlignedScene& aligned) {
    const std::filesystem::path scene_dir = out_dir / report.scene_id;
    std::filesystem::create_directories(scene_dir);
    write_pnm8(aligned.reference, scene_dir / "reference.pnm");
    write_bmp8(aligned.reference, scene_dir / "reference.bmp");
    write_pnm8(aligned.clean.image, scene_dir / "clean.pnm");
    write_bmp8(aligned.clean.image, scene_dir / "clean.bmp");
    write_diagnostics_csv(aligned.clean.diagnostics, scene_dir / "diagnostics_clean.csv");
    for (std::size_t i = 0; i < aligned.noisy.size(); ++i) {
        const std::string stem = "noisy_" + std::to_string(i);
        write_pnm8(aligned.noisy[i].image, scene_dir / (stem + ".pnm"));
        write_bmp8(aligned.noisy[i].image, scene_dir / (stem + ".bmp"));
        write_diagnostics_csv(aligned.noisy[i].diagnostics, scene_dir / ("diagnostics_" + stem + ".csv"));
    }
}

ImageReport make_clean_report(const AlignedScene& aligned, const PixelMask& mask) {
    ImageReport report;
    report.role = "clean";
    report.alpha = aligned.clean.alpha;
    NoiseEstimate est = sigma_clean(aligned.reference, aligned.clean.image, &mask);
    report.psnr_db = psnr_from_sigma(est.overall);
    report.estimates.push_back(std::move(est));
    return report;
}

ImageReport make_noisy_report(const AlignedScene& aligned, std::size_t index, const PixelMask& mask,
                              const PipelineConfig& config) {
    ImageReport report;
    report.role = "noisy";
    report.index = static_cast<int>(index);
    const AlignedImage& noisy = aligned.noisy[index];
    report.alpha = noisy.alpha;
    NoiseEstimate eq3 = sigma_noisy(noisy.image, aligned.reference, aligned.clean.image, &mask);
    NoiseEstimate eq4 = sigma_noisy_avg(noisy.image, aligned.reference, aligned.clean.image, &mask);
    report.psnr_db = psnr_from_sigma(eq3.overall);
    report.estimates.push_back(std::move(eq3));
    report.estimates.push_back(std::move(eq4));
    if (config.with_curves) {
        try {
            report.curve = noise_curve(noisy.image, aligned.reference, aligned.clean.image,
                                       config.curve_bin_width, {}, &mask);
            report.curve.model_fit = fit_affine_noise_model(report.curve);
            report.has_curve = true;
        } catch (const InsufficientSupportError& e) {
            report.curve_note = e.what();
        }
    }
    return report;
}

SceneReport process_scene(const SceneManifest& manifest, const PipelineConfig& config,
                          const std::filesystem::path& out_dir, bool with_noisy) {
    SceneReport report;
    report.scene_id = manifest.scene_id;
    report.camera_tag = manifest.camera_tag;
    try {
        SceneBundle bundle = load_bundle(manifest);
        if (!with_noisy) {
            bundle.noisy.clear();
        }
        const AlignmentConfig align_cfg = effective_alignment(config.alignment, manifest.alignment);
        const AlignedScene aligned = align_scene(bundle, align_cfg);
        report.gamma = aligned.gamma;

        std::vector<const MultiImage*> mask_inputs{&aligned.reference, &aligned.clean.image};
        for (const AlignedImage& noisy : aligned.noisy) {
            mask_inputs.push_back(&noisy.image);
        }
        const PixelMask mask = saturation_mask(mask_inputs);
        if (mask.count() == 0) {
            throw InsufficientSupportError("every pixel is saturated in some image");
        }
        report.valid_pixels = mask.count();
        report.gate = quality_gate(aligned.reference, aligned.clean.image, config.threshold_db, &mask);

        report.images.push_back(make_clean_report(aligned, mask));
        for (std::size_t i = 0; i < aligned.noisy.size(); ++i) {
            report.images.push_back(make_noisy_report(aligned, i, mask, config));
        }
        if (config.write_images && !out_dir.empty()) {
            write_scene_outputs(out_dir, report, aligned);
        }
    } catch (const std::exception& e) {
        report.error = e.what();
        report.images.clear();
    }
    return report;
}

std::vector<CameraAggregate> build_aggregates(const std::vector<SceneReport>& scenes) {
    struct Acc {
        std::size_t scenes = 0;
        double noisy_sigma = 0.0;
        double noisy_psnr = 0.0;
        std::size_t noisy_n = 0;
        double clean_sigma = 0.0;
        double clean_psnr = 0.0;
        std::size_t clean_n = 0;
    };
    std::map<std::string, Acc> by_camera;
    for (const SceneReport& scene : scenes) {
        if (!scene.error.empty() || !scene.gate.pass) {
            continue;  // failed scenes stay out of the aggregates
        }
        Acc& acc = by_camera[scene.camera_tag];
        ++acc.scenes;
        for (const ImageReport& image : scene.images) {
            if (image.role == "clean") {
                acc.clean_sigma += image.estimates.front().overall;
                acc.clean_psnr += image.psnr_db;
                ++acc.clean_n;
            } else {
                acc.noisy_sigma += image.estimates.front().overall;
                acc.noisy_psnr += image.psnr_db;
                ++acc.noisy_n;
            }
        }
    }
    std::vector<CameraAggregate> result;
    for (const auto& [camera, acc] : by_camera) {
        CameraAggregate agg;
        agg.camera_tag = camera;
        agg.scene_count = acc.scenes;
        if (acc.noisy_n > 0) {
            agg.mean_noisy_sigma = acc.noisy_sigma / static_cast<double>(acc.noisy_n);
            agg.mean_noisy_psnr = acc.noisy_psnr / static_cast<double>(acc.noisy_n);
        }
        if (acc.clean_n > 0) {
            agg.mean_clean_sigma = acc.clean_sigma / static_cast<double>(acc.clean_n);
            agg.mean_clean_psnr = acc.clean_psnr / static_cast<double>(acc.clean_n);
        }
        result.push_back(std::move(agg));
    }
    return result;
}

BatchReport run_batch(const std::vector<SceneManifest>& manifests, const PipelineConfig& config,
                      const std::filesystem::path& out_dir, bool with_noisy) {
    BatchReport report;
    report.seed = config.seed;
    report.scenes.resize(manifests.size());
    parallel_for_indexed(manifests.size(), config.workers, [&](std::size_t i) {
        report.scenes[i] = process_scene(manifests[i], config, out_dir, with_noisy);
    });
    std::stable_sort(report.scenes.begin(), report.scenes.end(),
                     [](const SceneReport& a, const SceneReport& b) { return a.scene_id < b.scene_id; });
    report.aggregates = build_aggregates(report.scenes);
    return report;
}

json estimate_to_json(const NoiseEstimate& est) {
    json j;
    j["method"] = estimation_method_name(est.method);
    j["sigma_r"] = est.sigma[0];
    j["sigma_g"] = est.sigma[1];
    j["sigma_b"] = est.sigma[2];
    j["sigma_overall"] = est.overall;
    j["support"] = est.support;
    j["negative_radicand"] = est.negative_radicand;
    return j;
}

NoiseEstimate estimate_from_json(const json& j) {
    NoiseEstimate est;
    const std::string method = j.value("method", "clean_pair");
    for (EstimationMethod m : {EstimationMethod::CleanPair, EstimationMethod::NoisyVsRef,
                               EstimationMethod::NoisyVsAvg, EstimationMethod::BlurredRef,
                               EstimationMethod::DirectVsGt}) {
        if (method == estimation_method_name(m)) {
            est.method = m;
        }
    }
    est.sigma[0] = j.value("sigma_r", 0.0);
    est.sigma[1] = j.value("sigma_g", 0.0);
    est.sigma[2] = j.value("sigma_b", 0.0);
    est.overall = j.value("sigma_overall", 0.0);
    est.support = j.value("support", std::size_t{0});
    est.negative_radicand = j.value("negative_radicand", false);
    return est;
}

}  // namespace

BatchReport run_pipeline(const std::vector<SceneManifest>& manifests, const PipelineConfig& config,
                         const std::filesystem::path& out_dir) {
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
    }
    return run_batch(manifests, config, out_dir, true);
}

BatchReport run_gate(const std::vector<SceneManifest>& manifests, const PipelineConfig& config) {
    PipelineConfig cfg = config;
    cfg.write_images = false;
    cfg.with_curves = false;
    return run_batch(manifests, cfg, {}, false);
}

bool report_has_errors(const BatchReport& report) {
    for (const SceneReport& scene : report.scenes) {
        if (!scene.error.empty()) {
            return true;
        }
    }
    return false;
}

void write_report_json(const BatchReport& report, const std::filesystem::path& path) {
    json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["seed"] = report.seed;

    json scenes = json::array();
    json passed = json::array();
    json failed = json::array();
    json errored = json::array();
    for (const SceneReport& scene : report.scenes) {
        json s;
        s["scene_id"] = scene.scene_id;
        s["camera_tag"] = scene.camera_tag;
        if (!scene.error.empty()) {
            s["error"] = scene.error;
            errored.push_back(scene.scene_id);
            scenes.push_back(std::move(s));
            continue;
        }
        (scene.gate.pass ? passed : failed).push_back(scene.scene_id);
        s["gate"] = {{"clean_pair_psnr", scene.gate.clean_pair_psnr},
                     {"threshold_db", scene.gate.threshold_db},
                     {"pass", scene.gate.pass}};
        s["gamma"] = {{"gamma", scene.gamma.gamma},
                      {"anchor_percentile", scene.gamma.anchor_percentile},
                      {"anchor_value", scene.gamma.anchor_value}};
        s["valid_pixels"] = scene.valid_pixels;
        json images = json::array();
        for (const ImageReport& image : scene.images) {
            json im;
            im["role"] = image.role;
            im["index"] = image.index;
            im["alpha"] = {image.alpha[0].alpha, image.alpha[1].alpha, image.alpha[2].alpha};
            im["alpha_converged"] = {image.alpha[0].converged, image.alpha[1].converged,
                                     image.alpha[2].converged};
            im["psnr_db"] = image.psnr_db;
            json ests = json::array();
            for (const NoiseEstimate& est : image.estimates) {
                ests.push_back(estimate_to_json(est));
            }
            im["estimates"] = std::move(ests);
            if (image.has_curve) {
                json bins = json::array();
                for (const NoiseCurveBin& bin : image.curve.bins) {
                    bins.push_back({{"center", bin.intensity_center},
                                    {"sigma", bin.sigma},
                                    {"support", bin.support}});
                }
                json curve;
                curve["bin_width"] = image.curve.bin_width;
                curve["bins"] = std::move(bins);
                if (image.curve.model_fit) {
                    curve["model_fit"] = {{"a", image.curve.model_fit->slope_a},
                                          {"b", image.curve.model_fit->intercept_b}};
                }
                im["curve"] = std::move(curve);
            } else if (!image.curve_note.empty()) {
                im["curve_note"] = image.curve_note;
            }
            images.push_back(std::move(im));
        }
        s["images"] = std::move(images);
        scenes.push_back(std::move(s));
    }
    doc["scenes"] = std::move(scenes);
    doc["gate_passed"] = std::move(passed);
    doc["gate_failed"] = std::move(failed);
    doc["errored"] = std::move(errored);

    json aggregates = json::array();
    for (const CameraAggregate& agg : report.aggregates) {
        aggregates.push_back({{"camera_tag", agg.camera_tag},
                              {"scene_count", agg.scene_count},
                              {"mean_noisy_sigma", agg.mean_noisy_sigma},
                              {"mean_noisy_psnr", agg.mean_noisy_psnr},
                              {"mean_clean_sigma", agg.mean_clean_sigma},
                              {"mean_clean_psnr", agg.mean_clean_psnr}});
    }
    doc["aggregates"] = std::move(aggregates);

    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << doc.dump(2) << "\n";
}

BatchReport read_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open report " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidParameterError("report " + path.string() + " is not valid JSON: " + e.what());
    }
    if (doc.value("schema_version", -1) != kReportSchemaVersion) {
        throw InvalidParameterError("report " + path.string() + " has an unsupported schema_version");
    }
    BatchReport report;
    report.seed = doc.value("seed", std::uint64_t{0});
    for (const json& s : doc.value("scenes", json::array())) {
        SceneReport scene;
        scene.scene_id = s.value("scene_id", "");
        scene.camera_tag = s.value("camera_tag", "");
        scene.error = s.value("error", "");
        if (!scene.error.empty()) {
            report.scenes.push_back(std::move(scene));
            continue;
        }
        const json& gate = s.at("gate");
        scene.gate.clean_pair_psnr = gate.value("clean_pair_psnr", 0.0);
        scene.gate.threshold_db = gate.value("threshold_db", 34.0);
        scene.gate.pass = gate.value("pass", false);
        const json& gamma = s.at("gamma");
        scene.gamma.gamma = gamma.value("gamma", 0.0);
        scene.gamma.anchor_percentile = gamma.value("anchor_percentile", 99.0);
        scene.gamma.anchor_value = gamma.value("anchor_value", 230.0);
        scene.valid_pixels = s.value("valid_pixels", std::size_t{0});
        for (const json& im : s.value("images", json::array())) {
            ImageReport image;
            image.role = im.value("role", "");
            image.index = im.value("index", -1);
            const json& alpha = im.at("alpha");
            for (std::size_t c = 0; c < 3; ++c) {
                image.alpha[c].alpha = alpha.at(c).get<double>();
            }
            image.psnr_db = im.value("psnr_db", 0.0);
            for (const json& est : im.value("estimates", json::array())) {
                image.estimates.push_back(estimate_from_json(est));
            }
            if (im.contains("curve")) {
                const json& curve = im.at("curve");
                image.curve.bin_width = curve.value("bin_width", 2.0);
                for (const json& bin : curve.value("bins", json::array())) {
                    NoiseCurveBin b;
                    b.intensity_center = bin.value("center", 0.0);
                    b.sigma = bin.value("sigma", 0.0);
                    b.support = bin.value("support", std::size_t{0});
                    image.curve.bins.push_back(b);
                }
                if (curve.contains("model_fit")) {
                    AffineNoiseFit fit;
                    fit.slope_a = curve.at("model_fit").value("a", 0.0);
                    fit.intercept_b = curve.at("model_fit").value("b", 0.0);
                    image.curve.model_fit = fit;
                }
                image.has_curve = true;
            }
            scene.images.push_back(std::move(image));
        }
        report.scenes.push_back(std::move(scene));
    }
    for (const json& agg : doc.value("aggregates", json::array())) {
        CameraAggregate a;
        a.camera_tag = agg.value("camera_tag", "");
        a.scene_count = agg.value("scene_count", std::size_t{0});
        a.mean_noisy_sigma = agg.value("mean_noisy_sigma", 0.0);
        a.mean_noisy_psnr = agg.value("mean_noisy_psnr", 0.0);
        a.mean_clean_sigma = agg.value("mean_clean_sigma", 0.0);
        a.mean_clean_psnr = agg.value("mean_clean_psnr", 0.0);
        report.aggregates.push_back(std::move(a));
    }
    return report;
}

void write_report_csv(const BatchReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "scene_id,camera_tag,status,gate_psnr_db,gate_pass,gamma,role,image_index,method,"
           "sigma_r,sigma_g,sigma_b,sigma_overall,psnr_db,negative_radicand,support\n";
    for (const SceneReport& scene : report.scenes) {
        if (!scene.error.empty()) {
            out << scene.scene_id << "," << scene.camera_tag << ",error,,,,,,,,,,,,,\n";
            continue;
        }
        for (const ImageReport& image : scene.images) {
            for (const NoiseEstimate& est : image.estimates) {
                out << scene.scene_id << "," << scene.camera_tag << ",ok,"
                    << format_double(scene.gate.clean_pair_psnr) << ","
                    << (scene.gate.pass ? "true" : "false") << ","
                    << format_double(scene.gamma.gamma) << "," << image.role << "," << image.index
                    << "," << estimation_method_name(est.method) << "," << format_double(est.sigma[0])
                    << "," << format_double(est.sigma[1]) << "," << format_double(est.sigma[2]) << ","
                    << format_double(est.overall) << "," << format_double(image.psnr_db) << ","
                    << (est.negative_radicand ? "true" : "false") << "," << est.support << "\n";
            }
        }
    }
}

}  // namespace noisepair
