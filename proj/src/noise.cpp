#include "noisepair/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "noisepair/errors.hpp"
#include "noisepair/image_ops.hpp"
#include "noisepair/metrics.hpp"
#include "noisepair/plane_ops.hpp"

namespace noisepair {

const char* estimation_method_name(EstimationMethod m) {
    switch (m) {
        case EstimationMethod::CleanPair: return "clean_pair";
        case EstimationMethod::NoisyVsRef: return "noisy_vs_ref";
        case EstimationMethod::NoisyVsAvg: return "noisy_vs_avg";
        case EstimationMethod::BlurredRef: return "blurred_ref";
        case EstimationMethod::DirectVsGt: return "direct_vs_gt";
    }
    return "unknown";
}

namespace {

NoiseEstimate from_scaled_variance(const DiffStats& stats, double scale, EstimationMethod method) {
    NoiseEstimate est;
    est.method = method;
    est.support = stats.channel[0].count;
    for (int c = 0; c < 3; ++c) {
        est.sigma[static_cast<std::size_t>(c)] =
            std::sqrt(scale * stats.channel[static_cast<std::size_t>(c)].variance);
    }
    est.overall = std::sqrt(scale * stats.pooled.variance);
    return est;
}

// sqrt(main - scale * pair) per channel and pooled, clamping negative
// radicands to zero with the warning flag.
NoiseEstimate from_variance_difference(const DiffStats& main, const DiffStats& pair, double scale,
                                       EstimationMethod method) {
    NoiseEstimate est;
    est.method = method;
    est.support = main.channel[0].count;
    for (int c = 0; c < 3; ++c) {
        const double v = main.channel[static_cast<std::size_t>(c)].variance -
                         scale * pair.channel[static_cast<std::size_t>(c)].variance;
        if (v < 0.0) {
            est.negative_radicand = true;
            est.sigma[static_cast<std::size_t>(c)] = 0.0;
        } else {
            est.sigma[static_cast<std::size_t>(c)] = std::sqrt(v);
        }
    }
    const double v = main.pooled.variance - scale * pair.pooled.variance;
    if (v < 0.0) {
        est.negative_radicand = true;
        est.overall = 0.0;
    } else {
        est.overall = std::sqrt(v);
    }
    return est;
}

MultiImage half_sum(const MultiImage& a, const MultiImage& b) {
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const std::vector<double>& sa = a.channel(c).samples();
        const std::vector<double>& sb = b.channel(c).samples();
        std::vector<double> out(sa.size());
        for (std::size_t i = 0; i < sa.size(); ++i) {
            out[i] = 0.5 * (sa[i] + sb[i]);
        }
        planes[static_cast<std::size_t>(c)] = RasterPlane(a.width(), a.height(), std::move(out));
    }
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), a.domain());
}

}  // namespace

NoiseEstimate sigma_clean(const MultiImage& ref, const MultiImage& clean, const PixelMask* mask) {
    const DiffStats stats = masked_diff_stats(ref, clean, mask);
    return from_scaled_variance(stats, 0.5, EstimationMethod::CleanPair);
}

NoiseEstimate sigma_noisy(const MultiImage& noisy, const MultiImage& ref, const MultiImage& clean,
                          const PixelMask* mask) {
    const DiffStats main = masked_diff_stats(noisy, ref, mask);
    const DiffStats pair = masked_diff_stats(ref, clean, mask);
    return from_variance_difference(main, pair, 0.5, EstimationMethod::NoisyVsRef);
}

NoiseEstimate sigma_noisy_avg(const MultiImage& noisy, const MultiImage& ref,
                              const MultiImage& clean, const PixelMask* mask) {
    const MultiImage avg = half_sum(ref, clean);
    const DiffStats main = masked_diff_stats(noisy, avg, mask);
    const DiffStats pair = masked_diff_stats(ref, clean, mask);
    return from_variance_difference(main, pair, 0.25, EstimationMethod::NoisyVsAvg);
}

NoiseEstimate sigma_standard(const MultiImage& a, const MultiImage& b, const PixelMask* mask) {
    const DiffStats stats = masked_diff_stats(a, b, mask);
    return from_scaled_variance(stats, 1.0, EstimationMethod::DirectVsGt);
}

NoiseEstimate sigma_blurred_reference(const MultiImage& noisy, const MultiImage& ref,
                                      double blur_sigma, const PixelMask* mask) {
    RasterPlane r = gaussian_blur(ref.channel(0), blur_sigma);
    RasterPlane g = gaussian_blur(ref.channel(1), blur_sigma);
    RasterPlane b = gaussian_blur(ref.channel(2), blur_sigma);
    // Blur keeps samples inside the span of the originals, so the domain tag
    // carries over unchanged.
    const MultiImage blurred(std::move(r), std::move(g), std::move(b), ref.domain());
    const DiffStats stats = masked_diff_stats(noisy, blurred, mask);
    NoiseEstimate est = from_scaled_variance(stats, 1.0, EstimationMethod::BlurredRef);
    return est;
}

GateVerdict quality_gate(const MultiImage& ref, const MultiImage& clean, double threshold_db,
                         const PixelMask* mask) {
    const NoiseEstimate est = sigma_clean(ref, clean, mask);
    GateVerdict verdict;
    verdict.threshold_db = threshold_db;
    verdict.clean_pair_psnr = psnr_from_sigma(est.overall);
    verdict.pass = verdict.clean_pair_psnr >= threshold_db;
    return verdict;
}

PixelMask saturation_mask(const std::vector<const MultiImage*>& images) {
    if (images.empty()) {
        throw InvalidParameterError("saturation_mask: no images given");
    }
    const int w = images.front()->width();
    const int h = images.front()->height();
    PixelMask mask(w, h, true);
    std::vector<std::uint8_t>& bits = mask.bits();
    for (const MultiImage* image : images) {
        if (image->width() != w || image->height() != h) {
            throw InvalidParameterError("saturation_mask: images must share dimensions");
        }
        for (int c = 0; c < MultiImage::kChannels; ++c) {
            const std::vector<double>& s = image->channel(c).samples();
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i] <= 0.0 || s[i] >= 255.0) {
                    bits[i] = 0;
                }
            }
        }
    }
    return mask;
}

NoiseCurve noise_curve(const MultiImage& noisy, const MultiImage& ref, const MultiImage& clean,
                       double bin_width, const NoiseCurveConfig& config, const PixelMask* mask) {
    if (!(bin_width > 0.0)) {
        throw InvalidParameterError("noise_curve: bin width must be positive");
    }
    if (config.channel < -1 || config.channel >= MultiImage::kChannels) {
        throw InvalidParameterError("noise_curve: channel must be -1 (pooled) or 0..2");
    }
    if (noisy.width() != ref.width() || noisy.height() != ref.height() ||
        clean.width() != ref.width() || clean.height() != ref.height()) {
        throw InvalidParameterError("noise_curve: images must share dimensions");
    }

    const int bin_count = static_cast<int>(std::floor(255.0 / bin_width)) + 1;
    struct BinAcc {
        double sum_main = 0.0;
        double sq_main = 0.0;
        double sum_pair = 0.0;
        double sq_pair = 0.0;
        std::size_t n = 0;
    };
    std::vector<BinAcc> acc(static_cast<std::size_t>(bin_count));

    const int c_lo = config.channel < 0 ? 0 : config.channel;
    const int c_hi = config.channel < 0 ? MultiImage::kChannels : config.channel + 1;
    const std::vector<std::uint8_t>* bits = nullptr;
    if (mask != nullptr) {
        if (mask->width() != ref.width() || mask->height() != ref.height()) {
            throw InvalidParameterError("noise_curve: mask dimensions must match the images");
        }
        bits = &mask->bits();
    }
    for (int c = c_lo; c < c_hi; ++c) {
        const std::vector<double>& sn = noisy.channel(c).samples();
        const std::vector<double>& sr = ref.channel(c).samples();
        const std::vector<double>& sc = clean.channel(c).samples();
        for (std::size_t i = 0; i < sr.size(); ++i) {
            if (bits != nullptr && !(*bits)[i]) {
                continue;
            }
            const double t = std::min(std::max(sr[i], 0.0), 255.0);
            const int bin = std::min(static_cast<int>(t / bin_width), bin_count - 1);
            BinAcc& ba = acc[static_cast<std::size_t>(bin)];
            const double d_main = sn[i] - 0.5 * (sr[i] + sc[i]);
            const double d_pair = sr[i] - sc[i];
            ba.sum_main += d_main;
            ba.sq_main += d_main * d_main;
            ba.sum_pair += d_pair;
            ba.sq_pair += d_pair * d_pair;
            ++ba.n;
        }
    }

    NoiseCurve curve;
    curve.bin_width = bin_width;
    for (int bin = 0; bin < bin_count; ++bin) {
        const BinAcc& ba = acc[static_cast<std::size_t>(bin)];
        if (ba.n < config.min_support) {
            continue;
        }
        const double n = static_cast<double>(ba.n);
        const double mean_main = ba.sum_main / n;
        const double var_main = ba.sq_main / n - mean_main * mean_main;
        const double mean_pair = ba.sum_pair / n;
        const double var_pair = ba.sq_pair / n - mean_pair * mean_pair;
        const double v = var_main - 0.25 * var_pair;
        NoiseCurveBin row;
        row.intensity_center = (static_cast<double>(bin) + 0.5) * bin_width;
        row.sigma = std::sqrt(std::max(v, 0.0));
        row.support = ba.n;
        curve.bins.push_back(row);
    }
    if (curve.bins.empty()) {
        throw InsufficientSupportError("noise_curve: no bin reaches the minimum support of " +
                                       std::to_string(config.min_support));
    }
    return curve;
}

AffineNoiseFit fit_affine_noise_model(const NoiseCurve& curve) {
    if (curve.bins.size() < 2) {
        throw InsufficientSupportError("fit_affine_noise_model: need at least 2 bins");
    }
    double sw = 0.0;
    double swx = 0.0;
    double swy = 0.0;
    double swxx = 0.0;
    double swxy = 0.0;
    for (const NoiseCurveBin& bin : curve.bins) {
        const double w = static_cast<double>(bin.support);
        const double x = bin.intensity_center;
        const double y = bin.sigma * bin.sigma;
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
    }
    const double det = sw * swxx - swx * swx;
    if (det == 0.0) {
        throw InsufficientSupportError("fit_affine_noise_model: bin centers are degenerate");
    }
    AffineNoiseFit fit;
    fit.slope_a = (sw * swxy - swx * swy) / det;
    fit.intercept_b = (swy - fit.slope_a * swx) / sw;
    return fit;
}

void write_noise_curve_csv(const NoiseCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "center,sigma,support\n";
    char line[96];
    for (const NoiseCurveBin& bin : curve.bins) {
        std::snprintf(line, sizeof(line), "%.10g,%.10g,%zu\n", bin.intensity_center, bin.sigma,
                      bin.support);
        out << line;
    }
}

}  // namespace noisepair
