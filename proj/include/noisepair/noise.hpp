#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "noisepair/raster.hpp"

namespace noisepair {

enum class EstimationMethod { CleanPair, NoisyVsRef, NoisyVsAvg, BlurredRef, DirectVsGt };

const char* estimation_method_name(EstimationMethod m);

// Noise standard deviation in 8-bit intensity levels, per channel and pooled.
struct NoiseEstimate {
    EstimationMethod method = EstimationMethod::CleanPair;
    std::array<double, 3> sigma{};  // R, G, B
    double overall = 0.0;           // all channels pooled
    std::size_t support = 0;        // pixels used per channel
    // Set when a variance difference came out negative and was clamped to
    // zero; the noisy image is not measurably noisier than the clean pair.
    bool negative_radicand = false;
};

struct NoiseCurveBin {
    double intensity_center = 0.0;
    double sigma = 0.0;
    std::size_t support = 0;
};

struct AffineNoiseFit {
    double slope_a = 0.0;
    double intercept_b = 0.0;
};

struct NoiseCurve {
    std::vector<NoiseCurveBin> bins;
    double bin_width = 2.0;
    std::optional<AffineNoiseFit> model_fit;
};

struct GateVerdict {
    double clean_pair_psnr = 0.0;
    double threshold_db = 34.0;
    bool pass = false;
};

// sigma^2(eps) = 1/2 var(ref - clean).
NoiseEstimate sigma_clean(const MultiImage& ref, const MultiImage& clean,
                          const PixelMask* mask = nullptr);

// sigma^2(eps_n) = var(noisy - ref) - 1/2 var(ref - clean).
NoiseEstimate sigma_noisy(const MultiImage& noisy, const MultiImage& ref, const MultiImage& clean,
                          const PixelMask* mask = nullptr);

// sigma^2(eps_n) = var(noisy - (ref + clean)/2) - 1/4 var(ref - clean).
NoiseEstimate sigma_noisy_avg(const MultiImage& noisy, const MultiImage& ref,
                              const MultiImage& clean, const PixelMask* mask = nullptr);

// Plain difference estimate stddev(a - b); the baseline the decomposition
// estimators are compared against.
NoiseEstimate sigma_standard(const MultiImage& a, const MultiImage& b,
                             const PixelMask* mask = nullptr);

// stddev(noisy - blur(ref, blur_sigma)). Passing the same image twice
// measures an image against its own heavily blurred version.
NoiseEstimate sigma_blurred_reference(const MultiImage& noisy, const MultiImage& ref,
                                      double blur_sigma = 20.0, const PixelMask* mask = nullptr);

// PSNR of the clean pair from the decomposition pooled sigma; pass iff above
// the threshold. Zero sigma reports the capped PSNR and passes.
GateVerdict quality_gate(const MultiImage& ref, const MultiImage& clean, double threshold_db = 34.0,
                         const PixelMask* mask = nullptr);

// Mask excluding every pixel where any channel of any input sits at or
// outside the 8-bit bounds; clipped samples break the additive noise model.
PixelMask saturation_mask(const std::vector<const MultiImage*>& images);

struct NoiseCurveConfig {
    std::size_t min_support = 1000;
    int channel = -1;  // -1 pools all channels, 0..2 selects one
};

// Per-intensity noise estimation: pixels are binned by the reference
// intensity, the avg-based decomposition runs inside each bin, and bins
// below min_support are dropped.
NoiseCurve noise_curve(const MultiImage& noisy, const MultiImage& ref, const MultiImage& clean,
                       double bin_width = 2.0, const NoiseCurveConfig& config = {},
                       const PixelMask* mask = nullptr);

// Weighted least squares of bin variance on bin center, weights = support.
AffineNoiseFit fit_affine_noise_model(const NoiseCurve& curve);

void write_noise_curve_csv(const NoiseCurve& curve, const std::filesystem::path& path);

}  // namespace noisepair
