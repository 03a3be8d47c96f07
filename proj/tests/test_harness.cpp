#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "noisepair/calibrate.hpp"
#include "noisepair/codec.hpp"
#include "noisepair/denoise.hpp"
#include "noisepair/errors.hpp"
#include "noisepair/image_ops.hpp"
#include "noisepair/metrics.hpp"
#include "noisepair/pipeline.hpp"
#include "noisepair/plotdata.hpp"
#include "noisepair/rng.hpp"
#include "noisepair/scene.hpp"
#include "noisepair/subprocess.hpp"
#include "noisepair/synth_validate.hpp"
#include "noisepair/synthetic.hpp"

namespace fs = std::filesystem;
using namespace noisepair;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Writes a raw 16-bit scene triple whose aligned 8-bit noise levels are
// close to sigma_rc and sigma_n, plus the ground truth itself.
struct SceneFiles {
    fs::path ref;
    fs::path clean;
    fs::path noisy;
    double gamma_true = 0.0;
};

SceneFiles write_scene(const fs::path& dir, const std::string& scene_id, const MultiImage& gt16,
                       double sigma_rc, double sigma_n, std::uint64_t seed) {
    const ReferenceGamma gamma = compute_reference_gamma(gt16);
    GaussianSampler rng(seed);
    SceneFiles files;
    files.gamma_true = gamma.gamma;
    files.ref = dir / (scene_id + "_ref.pnm");
    files.clean = dir / (scene_id + "_clean.pnm");
    files.noisy = dir / (scene_id + "_noisy.pnm");
    write_pnm16(add_gaussian_noise(gt16, sigma_rc / gamma.gamma, rng), files.ref);
    write_pnm16(add_gaussian_noise(gt16, sigma_rc / gamma.gamma, rng), files.clean);
    write_pnm16(add_gaussian_noise(gt16, sigma_n / gamma.gamma, rng), files.noisy);
    return files;
}

SceneManifest make_manifest_entry(const std::string& scene_id, const std::string& camera,
                                  const SceneFiles& files) {
    SceneManifest manifest;
    manifest.scene_id = scene_id;
    manifest.camera_tag = camera;
    manifest.reference = {files.ref};
    manifest.clean = {files.clean};
    manifest.noisy = {files.noisy};
    return manifest;
}

const SceneReport* find_scene(const BatchReport& report, const std::string& id) {
    for (const SceneReport& scene : report.scenes) {
        if (scene.scene_id == id) {
            return &scene;
        }
    }
    return nullptr;
}

const NoiseEstimate* find_estimate(const ImageReport& image, EstimationMethod method) {
    for (const NoiseEstimate& est : image.estimates) {
        if (est.method == method) {
            return &est;
        }
    }
    return nullptr;
}

}  // namespace

TEST_CASE("manifest parsing validates structure") {
    const fs::path dir = fresh_dir("noisepair_manifest");
    const auto write_manifest = [&dir](const nlohmann::json& doc) {
        const fs::path path = dir / "manifest.json";
        std::ofstream out(path);
        out << doc.dump(2);
        return path;
    };

    SUBCASE("a valid manifest round-trips") {
        nlohmann::json doc;
        doc["schema_version"] = 1;
        doc["scenes"] = nlohmann::json::array();
        doc["scenes"].push_back({{"scene_id", "s1"},
                                 {"camera_tag", "camA"},
                                 {"reference", {"r.pnm"}},
                                 {"clean", {"c.pnm"}},
                                 {"noisy", {"n1.pnm", "n2.pnm"}},
                                 {"crop", {{"x", 1}, {"y", 2}, {"w", 30}, {"h", 20}}},
                                 {"alignment", {{"anchor_value", 128.0}, {"per_channel_alpha", false}}}});
        const std::vector<SceneManifest> scenes = load_manifest(write_manifest(doc));
        REQUIRE(scenes.size() == 1);
        CHECK(scenes[0].scene_id == "s1");
        CHECK(scenes[0].camera_tag == "camA");
        CHECK(scenes[0].noisy.size() == 2);
        REQUIRE(scenes[0].crop.has_value());
        CHECK(scenes[0].crop->w == 30);
        CHECK(scenes[0].alignment.anchor_value == 128.0);
        CHECK(scenes[0].alignment.per_channel_alpha == false);
        CHECK_FALSE(scenes[0].alignment.anchor_percentile.has_value());
        // Relative paths resolve against the manifest directory.
        CHECK(scenes[0].reference[0] == dir / "r.pnm");
    }

    SUBCASE("missing schema version is rejected") {
        nlohmann::json doc;
        doc["scenes"] = nlohmann::json::array();
        CHECK_THROWS_AS(load_manifest(write_manifest(doc)), InvalidParameterError);
    }

    SUBCASE("missing roles and duplicates are rejected") {
        nlohmann::json doc;
        doc["schema_version"] = 1;
        doc["scenes"] = nlohmann::json::array();
        doc["scenes"].push_back({{"scene_id", "s1"}, {"reference", {"r.pnm"}}});
        CHECK_THROWS_AS(load_manifest(write_manifest(doc)), InvalidParameterError);

        doc["scenes"][0]["clean"] = {"r.pnm"};
        CHECK_THROWS_AS(load_manifest(write_manifest(doc)), InvalidParameterError);
    }
}

TEST_CASE("load_bundle applies crops and validates dimensions") {
    const fs::path dir = fresh_dir("noisepair_bundle");
    const MultiImage gt = synth_gt16(64, 48, 9000.0, 30000.0, 3);
    SceneFiles files = write_scene(dir, "s1", gt, 3.0, 10.0, 5);
    SceneManifest manifest = make_manifest_entry("s1", "cam", files);
    manifest.crop = CropRect{4, 4, 32, 24};
    const SceneBundle bundle = load_bundle(manifest);
    CHECK(bundle.reference[0].width() == 32);
    CHECK(bundle.reference[0].height() == 24);

    manifest.crop = CropRect{40, 40, 64, 48};
    CHECK_THROWS_AS(load_bundle(manifest), InvalidParameterError);
}

TEST_CASE("pipeline estimates match the generators on a 3-scene batch") {
    const fs::path dir = fresh_dir("noisepair_pipeline");
    const fs::path out = fresh_dir("noisepair_pipeline_out");

    std::vector<SceneManifest> manifests;
    const double sigmas_n[3] = {8.0, 10.0, 12.0};
    for (int i = 0; i < 3; ++i) {
        const std::string id = "scene" + std::to_string(i);
        const MultiImage gt = synth_gt16(256, 192, 9000.0, 30000.0, 100 + i);
        const SceneFiles files =
            write_scene(dir, id, gt, 3.0, sigmas_n[i], 200 + static_cast<std::uint64_t>(i));
        manifests.push_back(make_manifest_entry(id, i == 0 ? "camA" : "camB", files));
    }

    PipelineConfig config;
    const BatchReport report = run_pipeline(manifests, config, out);
    REQUIRE(report.scenes.size() == 3);
    CHECK_FALSE(report_has_errors(report));

    for (int i = 0; i < 3; ++i) {
        const SceneReport* scene = find_scene(report, "scene" + std::to_string(i));
        REQUIRE(scene != nullptr);
        CHECK(scene->error.empty());
        CHECK(scene->gate.pass);

        REQUIRE(scene->images.size() == 2);
        const ImageReport& clean = scene->images[0];
        CHECK(clean.role == "clean");
        const NoiseEstimate* eq2 = find_estimate(clean, EstimationMethod::CleanPair);
        REQUIRE(eq2 != nullptr);
        CHECK(eq2->overall == doctest::Approx(3.0).epsilon(0.01));

        const ImageReport& noisy = scene->images[1];
        const NoiseEstimate* eq3 = find_estimate(noisy, EstimationMethod::NoisyVsRef);
        const NoiseEstimate* eq4 = find_estimate(noisy, EstimationMethod::NoisyVsAvg);
        REQUIRE(eq3 != nullptr);
        REQUIRE(eq4 != nullptr);
        CHECK(eq3->overall == doctest::Approx(sigmas_n[i]).epsilon(0.01));
        CHECK(eq4->overall == doctest::Approx(sigmas_n[i]).epsilon(0.01));
        CHECK(noisy.psnr_db == doctest::Approx(psnr_from_sigma(eq3->overall)).epsilon(1e-12));
    }

    // Aggregates cover only passing scenes, grouped by camera.
    REQUIRE(report.aggregates.size() == 2);
    CHECK(report.aggregates[0].camera_tag == "camA");
    CHECK(report.aggregates[1].camera_tag == "camB");
    CHECK(report.aggregates[1].scene_count == 2);

    // Aligned outputs and reports land on disk.
    CHECK(fs::exists(out / "scene0" / "reference.pnm"));
    CHECK(fs::exists(out / "scene0" / "noisy_0.bmp"));
    CHECK(fs::exists(out / "scene1" / "diagnostics_clean.csv"));
    write_report_json(report, out / "report.json");
    write_report_csv(report, out / "report.csv");
    CHECK(fs::exists(out / "report.json"));

    // JSON report round-trips the key fields.
    const BatchReport parsed = read_report_json(out / "report.json");
    REQUIRE(parsed.scenes.size() == 3);
    CHECK(parsed.scenes[0].gate.pass == report.scenes[0].gate.pass);
    CHECK(parsed.scenes[0].images[1].estimates[0].overall ==
          doctest::Approx(report.scenes[0].images[1].estimates[0].overall).epsilon(1e-12));
}

TEST_CASE("gate failures are reported and excluded from aggregates") {
    const fs::path dir = fresh_dir("noisepair_gatefail");
    // Clean-pair sigma 7 puts the pair PSNR at 31.23 dB, below the gate.
    const MultiImage gt = synth_gt16(192, 144, 9000.0, 30000.0, 7);
    const SceneFiles files = write_scene(dir, "bad", gt, 7.0, 12.0, 9);
    const std::vector<SceneManifest> manifests{make_manifest_entry("bad", "cam", files)};

    PipelineConfig config;
    config.write_images = false;
    const BatchReport report = run_pipeline(manifests, config, {});
    REQUIRE(report.scenes.size() == 1);
    CHECK(report.scenes[0].error.empty());
    CHECK_FALSE(report.scenes[0].gate.pass);
    // The 230-anchor leaves the top intensity tail clipping at sigma 7, so
    // the end-to-end value sits a fraction of a dB above 20*log10(255/7).
    CHECK(std::fabs(report.scenes[0].gate.clean_pair_psnr - 31.23) < 0.25);
    CHECK(report.aggregates.empty());
}

TEST_CASE("empty manifest set produces an empty successful report") {
    const BatchReport report = run_pipeline({}, PipelineConfig{}, {});
    CHECK(report.scenes.empty());
    CHECK(report.aggregates.empty());
    CHECK_FALSE(report_has_errors(report));
}

TEST_CASE("one corrupt scene never aborts the batch") {
    const fs::path dir = fresh_dir("noisepair_isolation");
    const MultiImage gt_a = synth_gt16(160, 120, 9000.0, 30000.0, 11);
    const MultiImage gt_b = synth_gt16(160, 120, 9000.0, 30000.0, 12);
    const SceneFiles files_a = write_scene(dir, "ok", gt_a, 3.0, 10.0, 13);
    SceneFiles files_b = write_scene(dir, "broken", gt_b, 3.0, 10.0, 14);

    std::vector<SceneManifest> manifests{make_manifest_entry("ok", "cam", files_a),
                                         make_manifest_entry("broken", "cam", files_b)};

    PipelineConfig config;
    config.write_images = false;
    const BatchReport healthy = run_pipeline(manifests, config, {});

    // Truncate one payload byte of the broken scene's noisy image.
    const std::string bytes = slurp(files_b.noisy);
    std::ofstream(files_b.noisy, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 1));

    const BatchReport damaged = run_pipeline(manifests, config, {});
    REQUIRE(damaged.scenes.size() == 2);
    const SceneReport* ok = find_scene(damaged, "ok");
    const SceneReport* broken = find_scene(damaged, "broken");
    CHECK(broken->error.find("truncated") != std::string::npos);
    CHECK(ok->error.empty());
    CHECK(report_has_errors(damaged));

    // The healthy scene's numbers are untouched by the neighbor's failure.
    const SceneReport* ok_before = find_scene(healthy, "ok");
    CHECK(ok->gate.clean_pair_psnr == ok_before->gate.clean_pair_psnr);
    CHECK(ok->images[1].estimates[0].overall == ok_before->images[1].estimates[0].overall);
}

TEST_CASE("every scene lands in exactly one of the pass, fail or error sets") {
    const fs::path dir = fresh_dir("noisepair_totality");
    const MultiImage gt_ok = synth_gt16(160, 120, 9000.0, 30000.0, 31);
    const MultiImage gt_bad = synth_gt16(160, 120, 9000.0, 30000.0, 32);
    const MultiImage gt_broken = synth_gt16(160, 120, 9000.0, 30000.0, 33);
    std::vector<SceneManifest> manifests{
        make_manifest_entry("pass", "cam", write_scene(dir, "pass", gt_ok, 3.0, 10.0, 34)),
        make_manifest_entry("fail", "cam", write_scene(dir, "fail", gt_bad, 8.0, 12.0, 35)),
        make_manifest_entry("error", "cam", write_scene(dir, "error", gt_broken, 3.0, 10.0, 36))};
    std::ofstream(manifests[2].noisy[0], std::ios::binary | std::ios::trunc) << "P6 garbage";

    PipelineConfig config;
    config.write_images = false;
    const BatchReport report = run_pipeline(manifests, config, {});
    const fs::path json_path = dir / "report.json";
    write_report_json(report, json_path);

    std::ifstream in(json_path);
    nlohmann::json doc;
    in >> doc;
    std::vector<std::string> seen;
    for (const char* key : {"gate_passed", "gate_failed", "errored"}) {
        for (const auto& id : doc.at(key)) {
            seen.push_back(id.get<std::string>());
        }
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<std::string>{"error", "fail", "pass"});
    CHECK(doc.at("gate_passed").size() == 1);
    CHECK(doc.at("gate_failed").size() == 1);
    CHECK(doc.at("errored").size() == 1);
}

TEST_CASE("pipeline output is deterministic and worker-count independent") {
    const fs::path dir = fresh_dir("noisepair_determinism");
    std::vector<SceneManifest> manifests;
    for (int i = 0; i < 3; ++i) {
        const std::string id = "scene" + std::to_string(i);
        const MultiImage gt = synth_gt16(128, 96, 9000.0, 30000.0, 40 + i);
        manifests.push_back(
            make_manifest_entry(id, "cam", write_scene(dir, id, gt, 3.0, 10.0, 50 + i)));
    }

    const auto run_to_csv = [&manifests](int workers) {
        PipelineConfig config;
        config.workers = workers;
        config.write_images = false;
        const BatchReport report = run_pipeline(manifests, config, {});
        const fs::path csv = fs::temp_directory_path() /
                             ("noisepair_det_" + std::to_string(workers) + ".csv");
        write_report_csv(report, csv);
        const fs::path json = fs::temp_directory_path() /
                              ("noisepair_det_" + std::to_string(workers) + ".json");
        write_report_json(report, json);
        return slurp(csv) + slurp(json);
    };

    const std::string one_worker = run_to_csv(1);
    const std::string four_workers = run_to_csv(4);
    CHECK(one_worker == four_workers);
}

TEST_CASE("synthetic validation reproduces the error ordering at small scale") {
    const fs::path dir = fresh_dir("noisepair_synth");
    for (int i = 0; i < 2; ++i) {
        write_pnm16(synth_gt16(128, 128, 9000.0, 30000.0, 60 + i),
                    dir / ("gt" + std::to_string(i) + ".pnm"));
    }
    const std::vector<fs::path> paths{dir / "gt0.pnm", dir / "gt1.pnm"};
    const std::vector<SynthErrorRow> rows = run_synthetic_validation(paths, 2, 99);
    CHECK(rows.size() == 16);  // 2 GTs x 2 trials x 4 comparisons

    // The sigma/gamma construction lands the aligned 8-bit noise at the
    // configured levels: true sigma is 10 for noisy and 3 for clean images.
    for (const SynthErrorRow& row : rows) {
        const double target = row.image_role == "noisy" ? 10.0 : 3.0;
        CHECK(row.true_sigma == doctest::Approx(target).epsilon(0.03));
    }

    const SynthSummary summary = summarize_synth_errors(rows);
    CHECK(summary.ours_noisy_mean_abs_rel < 0.02);
    CHECK(summary.ours_clean_mean_abs_rel < 0.02);
    CHECK(summary.standard_noisy_mean_rel > 0.03);
    CHECK(summary.standard_clean_mean_rel > 0.30);

    const fs::path csv = dir / "errors.csv";
    write_synth_errors_csv(rows, csv);
    const std::string text = slurp(csv);
    CHECK(text.find("gt_id,trial,image,method,estimate,true_sigma,rel_error\n") == 0);

    // Determinism: the same seed reproduces identical rows.
    const std::vector<SynthErrorRow> again = run_synthetic_validation(paths, 2, 99);
    REQUIRE(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].estimate == rows[i].estimate);
        CHECK(again[i].true_sigma == rows[i].true_sigma);
    }

    // A different seed changes the draws.
    const std::vector<SynthErrorRow> other = run_synthetic_validation(paths, 2, 100);
    CHECK(other[0].estimate != rows[0].estimate);
}

TEST_CASE("calibration harness separates the two estimation methods") {
    // Constant surface with a gentle illumination gradient, single noisy shot.
    const int w = 256;
    const int h = 256;
    std::vector<double> samples(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            samples[static_cast<std::size_t>(y) * w + x] =
                12800.0 + 250.0 * (static_cast<double>(x) / (w - 1));
        }
    }
    const RasterPlane base(w, h, samples);
    const MultiImage gt(base, base, base, Domain::Raw16);
    const double gamma_true = 128.0 / percentile(gt, 50.0);

    GaussianSampler rng(71);
    SceneBundle bundle;
    bundle.scene_id = "calib";
    bundle.reference = {add_gaussian_noise(gt, 3.0 / gamma_true, rng)};
    bundle.clean = {add_gaussian_noise(gt, 3.0 / gamma_true, rng)};
    bundle.noisy = {add_gaussian_noise(gt, 10.0 / gamma_true, rng)};

    const std::vector<CalibrationRow> rows = run_calibration(bundle);
    CHECK(rows.size() == 8);  // clean + one noisy, 4 channels each

    const CalibrationSummary summary = summarize_calibration(rows);
    CHECK(summary.ours_mean_abs_rel <= 0.02);
    CHECK(summary.standard_mean_abs_rel >= 0.20);

    // The clean image's standard estimate carries the sqrt(2) inflation.
    for (const CalibrationRow& row : rows) {
        if (row.image_role == "clean" && row.channel == "overall") {
            CHECK(row.standard_rel_error > 0.3);
            CHECK(std::fabs(row.ours_rel_error) < 0.02);
        }
    }

    const fs::path dir = fresh_dir("noisepair_calib");
    write_calibration_csv(rows, dir / "calibration.csv");
    emit_calibration_plot_data(rows, dir);
    CHECK(fs::exists(dir / "calibration_boxplots.csv"));
}

TEST_CASE("calibration on a zero-noise constant scene reports zero everywhere") {
    const MultiImage flat = constant_image(128, 128, 12800.0, Domain::Raw16);
    SceneBundle bundle;
    bundle.scene_id = "flat";
    bundle.reference = {flat};
    bundle.clean = {flat};
    bundle.noisy = {flat};
    const std::vector<CalibrationRow> rows = run_calibration(bundle);
    for (const CalibrationRow& row : rows) {
        CHECK(row.true_sigma == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
        CHECK(row.ours_sigma == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
        CHECK(row.standard_sigma == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("builtin denoisers smooth noise") {
    GaussianSampler rng(73);
    const MultiImage gt = constant_image(96, 96, 128.0, Domain::Aligned8);
    const MultiImage noisy = add_gaussian_noise(gt, 25.0, rng);

    const MultiImage smoothed = denoise_builtin(noisy, DenoiserKind::BuiltinGaussian, 2.0);
    const NoiseEstimate before = sigma_standard(noisy, gt);
    const NoiseEstimate after = sigma_standard(smoothed, gt);
    CHECK(after.overall < 0.3 * before.overall);

    const MultiImage median = denoise_builtin(noisy, DenoiserKind::BuiltinMedian, 1.0);
    const NoiseEstimate med_after = sigma_standard(median, gt);
    CHECK(med_after.overall < 0.7 * before.overall);
}

TEST_CASE("denoiser evaluation harness") {
    const fs::path dir = fresh_dir("noisepair_eval");
    const fs::path out = fresh_dir("noisepair_eval_out");

    // A gated scene: noiseless reference pair, sigma-25 noisy image.
    const MultiImage gt = synth_gt16(160, 120, 9000.0, 26000.0, 80);
    const ReferenceGamma gamma = compute_reference_gamma(gt);
    SceneFiles files;
    files.ref = dir / "ref.pnm";
    files.clean = dir / "clean.pnm";
    files.noisy = dir / "noisy.pnm";
    GaussianSampler rng(81);
    write_pnm16(gt, files.ref);
    write_pnm16(add_gaussian_noise(gt, 0.5 / gamma.gamma, rng), files.clean);
    write_pnm16(add_gaussian_noise(gt, 25.0 / gamma.gamma, rng), files.noisy);
    const std::vector<SceneManifest> manifests{make_manifest_entry("scene", "cam", files)};

    PipelineConfig config;

    SUBCASE("identity external denoiser leaves metrics unchanged exactly") {
        DenoiserSpec identity;
        identity.name = "identity";
        identity.kind = DenoiserKind::External;
        identity.command = "cp {input} {output}";
        const EvaluationReport report =
            run_denoise_eval(manifests, {identity}, {1.0}, config, out / "work");
        REQUIRE(report.rows.size() == 1);
        CHECK_FALSE(report.rows[0].failed);
        CHECK(report.rows[0].psnr_after == report.rows[0].psnr_before);
        CHECK(report.rows[0].ssim_after == report.rows[0].ssim_before);
    }

    SUBCASE("builtin gaussian improves PSNR by more than 3 dB at its best sigma") {
        DenoiserSpec gaussian;
        gaussian.name = "gaussian";
        gaussian.kind = DenoiserKind::BuiltinGaussian;
        const EvaluationReport report =
            run_denoise_eval(manifests, {gaussian}, {0.5, 1.0, 2.0, 4.0}, config, out / "work");
        REQUIRE(report.rows.size() == 4);
        double best_gain = -1e9;
        std::size_t best_index = 0;
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const double gain = report.rows[i].psnr_after - report.rows[i].psnr_before;
            if (report.rows[i].psnr_after >
                report.rows[best_index].psnr_after) {
                best_index = i;
            }
            best_gain = std::max(best_gain, gain);
        }
        CHECK(best_gain > 3.0);
        CHECK(report.rows[best_index].best_for_scene);
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            if (i != best_index) {
                CHECK_FALSE(report.rows[i].best_for_scene);
            }
        }

        write_eval_csv(report, out / "eval.csv");
        write_eval_json(report, out / "eval.json");
        CHECK(fs::exists(out / "eval.csv"));
    }

    SUBCASE("failing and slow external commands mark rows without aborting") {
        DenoiserSpec failing;
        failing.name = "failing";
        failing.kind = DenoiserKind::External;
        failing.command = "exit 3 # {input} {output}";

        DenoiserSpec slow;
        slow.name = "slow";
        slow.kind = DenoiserKind::External;
        slow.command = "sleep 5; cp {input} {output}";
        slow.timeout_seconds = 0.2;

        const EvaluationReport report =
            run_denoise_eval(manifests, {failing, slow}, {1.0}, config, out / "work");
        REQUIRE(report.rows.size() == 2);
        for (const EvalRow& row : report.rows) {
            CHECK(row.failed);
        }
        CHECK(report.rows[0].error.find("status 3") != std::string::npos);
        CHECK(report.rows[1].error.find("timed out") != std::string::npos);
    }

    SUBCASE("two noisy images get independent rows and best flags") {
        GaussianSampler rng2(97);
        const fs::path second = dir / "noisy2.pnm";
        write_pnm16(add_gaussian_noise(gt, 12.0 / gamma.gamma, rng2), second);
        std::vector<SceneManifest> two = manifests;
        two[0].noisy.push_back(second);

        DenoiserSpec gaussian;
        gaussian.name = "gaussian";
        gaussian.kind = DenoiserKind::BuiltinGaussian;
        const EvaluationReport report =
            run_denoise_eval(two, {gaussian}, {1.0, 2.0}, config, out / "work");
        REQUIRE(report.rows.size() == 4);  // 2 noisy images x 2 sigmas
        std::size_t best_count = 0;
        for (const EvalRow& row : report.rows) {
            CHECK_FALSE(row.failed);
            best_count += row.best_for_scene ? 1 : 0;
        }
        CHECK(best_count == 2);  // one best sigma per noisy image
        CHECK(report.rows[0].psnr_before != report.rows[2].psnr_before);
    }

    SUBCASE("gate failures are skipped with a reason") {
        SceneFiles bad = write_scene(dir, "noisyclean", gt, 8.0, 25.0, 91);
        const std::vector<SceneManifest> all{
            manifests[0], make_manifest_entry("noisyclean", "cam", bad)};
        DenoiserSpec gaussian;
        gaussian.name = "gaussian";
        gaussian.kind = DenoiserKind::BuiltinGaussian;
        const EvaluationReport report = run_denoise_eval(all, {gaussian}, {1.0}, config, out / "work");
        CHECK(report.rows.size() == 1);  // only the gated scene
        REQUIRE(report.skipped_scenes.size() == 1);
        CHECK(report.skipped_scenes[0].find("noisyclean") != std::string::npos);
        CHECK(report.skipped_scenes[0].find("gate") != std::string::npos);
    }
}

TEST_CASE("denoiser spec validation") {
    DenoiserSpec spec;
    spec.name = "ext";
    spec.kind = DenoiserKind::External;
    spec.command = "denoise {input}";  // no {output}
    CHECK_THROWS_AS(validate_denoiser_spec(spec), InvalidParameterError);

    const fs::path dir = fresh_dir("noisepair_specs");
    {
        std::ofstream out(dir / "denoisers.json");
        out << R"({"denoisers": [
            {"name": "g", "kind": "builtin_gaussian"},
            {"name": "x", "kind": "external", "command": "dn {sigma} {input} {output}",
             "timeout_seconds": 30, "reentrant": false}
        ]})";
    }
    const std::vector<DenoiserSpec> specs = load_denoiser_specs(dir / "denoisers.json");
    REQUIRE(specs.size() == 2);
    CHECK(specs[0].kind == DenoiserKind::BuiltinGaussian);
    CHECK(specs[1].timeout_seconds == 30.0);
    CHECK_FALSE(specs[1].reentrant);
}

TEST_CASE("run_command reports exit codes and timeouts") {
    CHECK(run_command("true", 10.0).exit_code == 0);
    CHECK(run_command("exit 7", 10.0).exit_code == 7);
    const CommandResult slow = run_command("sleep 5", 0.2);
    CHECK(slow.timed_out);
}

TEST_CASE("histogram and boxplot helpers") {
    SUBCASE("histogram counts are conserved") {
        std::vector<double> values;
        for (int i = 0; i < 40; ++i) {
            values.push_back(2.0 + 0.37 * i);
        }
        const std::vector<HistogramBin> bins = histogram(values, 1.0);
        std::size_t total = 0;
        for (const HistogramBin& bin : bins) {
            total += bin.count;
        }
        CHECK(total == 40);
    }

    SUBCASE("a single repeated value yields a single bin") {
        const std::vector<HistogramBin> bins = histogram({7.25, 7.25, 7.25}, 1.0);
        REQUIRE(bins.size() == 1);
        CHECK(bins[0].count == 3);
        CHECK(bins[0].lo == 7.0);
    }

    SUBCASE("boxplot quantiles match a sort-based oracle") {
        GaussianSampler rng(83);
        std::vector<double> values(101);
        for (double& v : values) {
            v = rng.gaussian();
        }
        const BoxplotStats stats = boxplot_stats(values);

        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        CHECK(stats.min == sorted.front());
        CHECK(stats.max == sorted.back());
        CHECK(stats.median == sorted[50]);  // odd count: exact middle element
        CHECK(stats.q25 == sorted[25]);     // (101-1)*0.25 = 25 exactly
        CHECK(stats.q75 == sorted[75]);

        // Even-count interpolation.
        const BoxplotStats even = boxplot_stats({1.0, 2.0, 3.0, 4.0});
        CHECK(even.median == 2.5);
        CHECK(even.q25 == 1.75);
    }

    SUBCASE("quantiles all equal for identical samples") {
        const BoxplotStats stats = boxplot_stats({4.2, 4.2, 4.2, 4.2});
        CHECK(stats.min == 4.2);
        CHECK(stats.q25 == 4.2);
        CHECK(stats.median == 4.2);
        CHECK(stats.q75 == 4.2);
        CHECK(stats.max == 4.2);
    }
}

TEST_CASE("emit_plot_data writes the CSV bundles") {
    // A synthetic 40-scene report, no pipeline run needed.
    BatchReport report;
    GaussianSampler rng(89);
    for (int i = 0; i < 40; ++i) {
        SceneReport scene;
        scene.scene_id = "s" + std::to_string(i);
        scene.camera_tag = i % 2 == 0 ? "camA" : "camB";
        scene.gate.pass = true;
        scene.gate.clean_pair_psnr = 38.0 + rng.gaussian();

        ImageReport clean;
        clean.role = "clean";
        NoiseEstimate eq2;
        eq2.method = EstimationMethod::CleanPair;
        eq2.overall = 3.0 + 0.3 * rng.gaussian();
        clean.estimates.push_back(eq2);
        clean.psnr_db = psnr_from_sigma(eq2.overall);
        scene.images.push_back(clean);

        ImageReport noisy;
        noisy.role = "noisy";
        noisy.index = 0;
        NoiseEstimate eq3;
        eq3.method = EstimationMethod::NoisyVsRef;
        eq3.overall = 15.0 + 2.0 * rng.gaussian();
        noisy.estimates.push_back(eq3);
        noisy.psnr_db = psnr_from_sigma(eq3.overall);
        scene.images.push_back(noisy);
        report.scenes.push_back(std::move(scene));
    }

    const fs::path out = fresh_dir("noisepair_plots");
    emit_plot_data(report, out);
    CHECK(fs::exists(out / "sigma_histogram_noisy.csv"));
    CHECK(fs::exists(out / "sigma_histogram_clean.csv"));
    CHECK(fs::exists(out / "boxplots.csv"));

    // Conservation: histogram counts sum to the number of noisy images.
    std::ifstream in(out / "sigma_histogram_noisy.csv");
    std::string line;
    std::getline(in, line);  // header
    std::size_t total = 0;
    while (std::getline(in, line)) {
        total += std::stoul(line.substr(line.rfind(',') + 1));
    }
    CHECK(total == 40);
}

TEST_CASE("synthetic error rows feed the relative-error boxplots") {
    std::vector<SynthErrorRow> rows;
    for (int i = 0; i < 10; ++i) {
        SynthErrorRow row;
        row.gt_id = "gt";
        row.trial = i;
        row.image_role = i % 2 == 0 ? "noisy" : "clean";
        row.method = i % 3 == 0 ? "ours" : "standard";
        row.estimate = 10.0;
        row.true_sigma = 10.0;
        row.rel_error = 0.01 * i;
        rows.push_back(row);
    }
    const fs::path out = fresh_dir("noisepair_synth_plots");
    emit_synth_plot_data(rows, out);
    const std::string text = slurp(out / "relative_error_boxplots.csv");
    CHECK(text.find("image,method,min,q25,median,q75,max,count\n") == 0);
    CHECK(text.find("noisy,ours") != std::string::npos);
    CHECK(text.find("clean,standard") != std::string::npos);
}
