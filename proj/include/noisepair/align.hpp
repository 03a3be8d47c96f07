#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "noisepair/raster.hpp"

namespace noisepair {

struct SceneBundle;

// Anchor mapping the raw reference into the 8-bit domain: the sample at
// `percentile` maps to `value`. Defaults implement the 99th-percentile -> 230
// rule; the calibration harness swaps in median -> 128.
struct AnchorSpec {
    double percentile = 99.0;
    double value = 230.0;
};

struct ReferenceGamma {
    double gamma = 0.0;  // scalar gain applied to all channels
    double anchor_percentile = 99.0;
    double anchor_value = 230.0;
};

struct AlphaEstimate {
    double alpha = 0.0;
    double objective_value = 0.0;
    std::size_t mask_size = 0;
    int iterations = 0;
    bool converged = false;
};

struct DiagnosticsBin {
    double bin_center = 0.0;
    double mean_diff = 0.0;
    double p2_5 = 0.0;
    double p97_5 = 0.0;
    std::size_t count = 0;
};

// Per-intensity scatter summary of (aligned - reference), pooled over
// channels, plus the +-95% guide band for a clean pair at 35 dB.
struct AlignmentDiagnostics {
    std::vector<DiagnosticsBin> bins;
    double noise_bound = 0.0;
};

struct AlignmentConfig {
    AnchorSpec anchor;
    bool per_channel_alpha = true;
    double blur_sigma = 5.0;
    double gradient_threshold = 1.0;
    std::size_t min_mask_support = 1000;
    double bracket_lo_factor = 0.25;
    double bracket_hi_factor = 4.0;
    double search_rel_tol = 1e-5;
    int max_iterations = 200;
};

// gamma = anchor_value / percentile(raw_ref, anchor_percentile).
ReferenceGamma compute_reference_gamma(const MultiImage& raw_ref, const AnchorSpec& anchor = {});

// E(alpha) = sum over mask of (ref8_blur - clamp(alpha * raw_blur, 0, 255))^2,
// accumulated in row-major order.
double alignment_objective(const RasterPlane& ref8_blur, const RasterPlane& raw_blur,
                           const PixelMask& mask, double alpha);

// Gain estimate for one channel: blurs both planes with sigma 5, builds the
// low-gradient mask on the blurred reference, brackets alpha around the ratio
// of masked means and runs golden-section search on the clamped objective.
AlphaEstimate estimate_alpha(const MultiImage& ref8, const MultiImage& raw, int channel,
                             const AlignmentConfig& config = {});

// Single gain shared by all channels; the objective sums the per-channel
// terms, each over its own mask.
AlphaEstimate estimate_alpha_joint(const MultiImage& ref8, const MultiImage& raw,
                                   const AlignmentConfig& config = {});

struct AlignedImage {
    MultiImage image;
    std::array<AlphaEstimate, 3> alpha;
    AlignmentDiagnostics diagnostics;
};

struct AlignedScene {
    MultiImage reference;  // 8-bit reference after the gamma mapping
    ReferenceGamma gamma;
    AlignedImage clean;
    std::vector<AlignedImage> noisy;
};

// Estimates alpha for one raw image against the 8-bit reference and applies
// it (to the unblurred samples) with clamping to [0, 255].
AlignedImage align_image(const MultiImage& ref8, const MultiImage& raw,
                         const AlignmentConfig& config = {});

// Full-scene alignment: averages the raw reference and clean groups, maps the
// reference by gamma, then aligns the averaged clean image and every noisy
// image by its own alpha.
AlignedScene align_scene(const SceneBundle& bundle, const AlignmentConfig& config = {});

AlignmentDiagnostics compute_alignment_diagnostics(const MultiImage& ref8, const MultiImage& aligned);

// 1.96 * sqrt(2) * sigma(35 dB), the 95% band for differences of a clean pair.
double alignment_noise_bound();

void write_diagnostics_csv(const AlignmentDiagnostics& diagnostics, const std::filesystem::path& path);

}  // namespace noisepair
