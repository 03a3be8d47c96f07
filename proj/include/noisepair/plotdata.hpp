#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "noisepair/calibrate.hpp"
#include "noisepair/pipeline.hpp"
#include "noisepair/synth_validate.hpp"

namespace noisepair {

// Linear-interpolation quantile of a sorted sample (type-7 convention).
double quantile_sorted(const std::vector<double>& sorted, double q);

struct BoxplotStats {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

BoxplotStats boxplot_stats(std::vector<double> values);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

// Fixed-width bins anchored at floor(min / width) * width. A sample set with
// a single distinct value yields a single bin.
std::vector<HistogramBin> histogram(const std::vector<double>& values, double bin_width);

// CSV bundles mirroring the report figures: per-scene sigma histograms,
// per-camera sigma/PSNR boxplot quantiles and the per-image noise curves.
void emit_plot_data(const BatchReport& report, const std::filesystem::path& out_dir);

// Relative-error boxplot quantiles per (image, method).
void emit_synth_plot_data(const std::vector<SynthErrorRow>& rows,
                          const std::filesystem::path& out_dir);

// Estimated-sigma boxplot quantiles per (method, channel).
void emit_calibration_plot_data(const std::vector<CalibrationRow>& rows,
                                const std::filesystem::path& out_dir);

}  // namespace noisepair
