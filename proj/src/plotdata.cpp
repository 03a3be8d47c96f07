#include "noisepair/plotdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "noisepair/errors.hpp"
#include "noisepair/noise.hpp"

namespace noisepair {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) {
        throw InvalidParameterError("quantile of an empty sample");
    }
    q = std::clamp(q, 0.0, 1.0);
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxplotStats boxplot_stats(std::vector<double> values) {
    if (values.empty()) {
        throw InvalidParameterError("boxplot of an empty sample");
    }
    std::sort(values.begin(), values.end());
    BoxplotStats stats;
    stats.min = values.front();
    stats.q25 = quantile_sorted(values, 0.25);
    stats.median = quantile_sorted(values, 0.5);
    stats.q75 = quantile_sorted(values, 0.75);
    stats.max = values.back();
    stats.count = values.size();
    return stats;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, double bin_width) {
    if (values.empty()) {
        return {};
    }
    if (!(bin_width > 0.0)) {
        throw InvalidParameterError("histogram bin width must be positive");
    }
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    const long first = static_cast<long>(std::floor(*min_it / bin_width));
    const long last = static_cast<long>(std::floor(*max_it / bin_width));
    std::vector<HistogramBin> bins;
    bins.reserve(static_cast<std::size_t>(last - first + 1));
    for (long b = first; b <= last; ++b) {
        HistogramBin bin;
        bin.lo = static_cast<double>(b) * bin_width;
        bin.hi = bin.lo + bin_width;
        bins.push_back(bin);
    }
    for (double v : values) {
        long b = static_cast<long>(std::floor(v / bin_width));
        b = std::clamp(b, first, last);
        ++bins[static_cast<std::size_t>(b - first)].count;
    }
    return bins;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    return out;
}

void write_histogram_csv(const std::vector<double>& values, double bin_width,
                         const std::filesystem::path& path) {
    std::ofstream out = open_csv(path);
    out << "bin_lo,bin_hi,count\n";
    for (const HistogramBin& bin : histogram(values, bin_width)) {
        out << format_double(bin.lo) << "," << format_double(bin.hi) << "," << bin.count << "\n";
    }
}

void write_boxplot_row(std::ofstream& out, const std::string& label1, const std::string& label2,
                       const BoxplotStats& stats) {
    out << label1 << "," << label2 << "," << format_double(stats.min) << ","
        << format_double(stats.q25) << "," << format_double(stats.median) << ","
        << format_double(stats.q75) << "," << format_double(stats.max) << "," << stats.count << "\n";
}

}  // namespace

void emit_plot_data(const BatchReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::vector<double> noisy_sigma;
    std::vector<double> clean_sigma;
    std::map<std::string, std::vector<double>> noisy_sigma_by_camera;
    std::map<std::string, std::vector<double>> noisy_psnr_by_camera;
    std::map<std::string, std::vector<double>> clean_sigma_by_camera;
    std::map<std::string, std::vector<double>> clean_psnr_by_camera;

    for (const SceneReport& scene : report.scenes) {
        if (!scene.error.empty()) {
            continue;
        }
        for (const ImageReport& image : scene.images) {
            const double sigma = image.estimates.empty() ? 0.0 : image.estimates.front().overall;
            if (image.role == "clean") {
                clean_sigma.push_back(sigma);
                clean_sigma_by_camera[scene.camera_tag].push_back(sigma);
                clean_psnr_by_camera[scene.camera_tag].push_back(image.psnr_db);
            } else {
                noisy_sigma.push_back(sigma);
                noisy_sigma_by_camera[scene.camera_tag].push_back(sigma);
                noisy_psnr_by_camera[scene.camera_tag].push_back(image.psnr_db);
            }
            if (image.has_curve) {
                const std::string stem = "curve_" + scene.scene_id + "_" + image.role +
                                         (image.index >= 0 ? "_" + std::to_string(image.index) : "");
                write_noise_curve_csv(image.curve, out_dir / (stem + ".csv"));
            }
        }
    }

    if (!noisy_sigma.empty()) {
        write_histogram_csv(noisy_sigma, 1.0, out_dir / "sigma_histogram_noisy.csv");
    }
    if (!clean_sigma.empty()) {
        write_histogram_csv(clean_sigma, 1.0, out_dir / "sigma_histogram_clean.csv");
    }

    std::ofstream box = open_csv(out_dir / "boxplots.csv");
    box << "camera_tag,metric,min,q25,median,q75,max,count\n";
    for (const auto& [camera, values] : noisy_sigma_by_camera) {
        write_boxplot_row(box, camera, "noisy_sigma", boxplot_stats(values));
    }
    for (const auto& [camera, values] : noisy_psnr_by_camera) {
        write_boxplot_row(box, camera, "noisy_psnr", boxplot_stats(values));
    }
    for (const auto& [camera, values] : clean_sigma_by_camera) {
        write_boxplot_row(box, camera, "clean_sigma", boxplot_stats(values));
    }
    for (const auto& [camera, values] : clean_psnr_by_camera) {
        write_boxplot_row(box, camera, "clean_psnr", boxplot_stats(values));
    }
}

void emit_synth_plot_data(const std::vector<SynthErrorRow>& rows,
                          const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const SynthErrorRow& row : rows) {
        groups[{row.image_role, row.method}].push_back(row.rel_error);
    }
    std::ofstream out = open_csv(out_dir / "relative_error_boxplots.csv");
    out << "image,method,min,q25,median,q75,max,count\n";
    for (const auto& [key, values] : groups) {
        write_boxplot_row(out, key.first, key.second, boxplot_stats(values));
    }
}

void emit_calibration_plot_data(const std::vector<CalibrationRow>& rows,
                                const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const CalibrationRow& row : rows) {
        groups[{std::string("ours"), row.channel}].push_back(row.ours_sigma);
        groups[{std::string("standard"), row.channel}].push_back(row.standard_sigma);
        groups[{std::string("true"), row.channel}].push_back(row.true_sigma);
    }
    std::ofstream out = open_csv(out_dir / "calibration_boxplots.csv");
    out << "method,channel,min,q25,median,q75,max,count\n";
    for (const auto& [key, values] : groups) {
        write_boxplot_row(out, key.first, key.second, boxplot_stats(values));
    }
}

}  // namespace noisepair
