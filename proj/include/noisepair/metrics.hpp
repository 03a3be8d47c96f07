#pragma once

#include <array>

#include "noisepair/raster.hpp"

namespace noisepair {

// PSNR values are capped here when the error is exactly zero.
inline constexpr double kPsnrCapDb = 99.0;

enum class ReferenceKind { GtAverage, Explicit };

struct MetricResult {
    double psnr_db = 0.0;
    double ssim = 0.0;
    std::array<double, 3> psnr_channel{};
    std::array<double, 3> ssim_channel{};
    ReferenceKind reference_kind = ReferenceKind::Explicit;
};

// 10 * log10(255^2 / MSE) over valid pixels, channels pooled.
double psnr_mse(const MultiImage& a, const MultiImage& b, const PixelMask* mask = nullptr);

// 20 * log10(255 / sigma); sigma 0 maps to the cap, sigma < 0 is an error.
double psnr_from_sigma(double sigma);

// Inverse mapping: the sigma a given PSNR corresponds to.
double sigma_from_psnr(double psnr_db);

// Mean local SSIM with the standard 11x11 Gaussian window (sigma 1.5,
// K1 = 0.01, K2 = 0.03, L = 255), evaluated where the window fits entirely.
double ssim_plane(const RasterPlane& a, const RasterPlane& b);

// Per-channel SSIM averaged over the three channels.
double ssim(const MultiImage& a, const MultiImage& b);

MetricResult compute_metrics(const MultiImage& image, const MultiImage& reference,
                             ReferenceKind kind, const PixelMask* mask = nullptr);

}  // namespace noisepair
