#include "noisepair/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "noisepair/errors.hpp"
#include "noisepair/golden.hpp"
#include "noisepair/image_ops.hpp"
#include "noisepair/metrics.hpp"
#include "noisepair/plane_ops.hpp"
#include "noisepair/scene.hpp"

namespace noisepair {

ReferenceGamma compute_reference_gamma(const MultiImage& raw_ref, const AnchorSpec& anchor) {
    if (!(anchor.value > 0.0) || anchor.value > 255.0) {
        throw InvalidParameterError("anchor value must lie in (0, 255]");
    }
    const double p = percentile(raw_ref, anchor.percentile);
    if (!(p > 0.0)) {
        throw DegenerateImageError("reference percentile " + std::to_string(anchor.percentile) +
                                   " is not positive; cannot anchor the gamma mapping");
    }
    ReferenceGamma result;
    result.gamma = anchor.value / p;
    result.anchor_percentile = anchor.percentile;
    result.anchor_value = anchor.value;
    return result;
}

double alignment_objective(const RasterPlane& ref8_blur, const RasterPlane& raw_blur,
                           const PixelMask& mask, double alpha) {
    if (ref8_blur.width() != raw_blur.width() || ref8_blur.height() != raw_blur.height() ||
        mask.width() != ref8_blur.width() || mask.height() != ref8_blur.height()) {
        throw InvalidParameterError("alignment_objective: planes and mask must share dimensions");
    }
    if (!(alpha > 0.0)) {
        throw InvalidParameterError("alignment_objective: alpha must be positive");
    }
    const std::vector<double>& ref = ref8_blur.samples();
    const std::vector<double>& raw = raw_blur.samples();
    const std::vector<std::uint8_t>& bits = mask.bits();
    double sum = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!bits[i]) {
            continue;
        }
        any = true;
        const double mapped = std::min(std::max(alpha * raw[i], 0.0), 255.0);
        const double d = ref[i] - mapped;
        sum += d * d;
    }
    if (!any) {
        throw InsufficientSupportError("alignment_objective: empty mask");
    }
    return sum;
}

namespace {

struct MaskedPair {
    RasterPlane ref_blur;
    RasterPlane raw_blur;
    PixelMask mask;
    double mean_ref = 0.0;
    double mean_raw = 0.0;
};

PixelMask low_gradient_mask(const RasterPlane& blurred_ref, double threshold) {
    const RasterPlane grad = gradient_magnitude(blurred_ref);
    PixelMask mask(grad.width(), grad.height(), false);
    const std::vector<double>& g = grad.samples();
    std::vector<std::uint8_t>& bits = mask.bits();
    for (std::size_t i = 0; i < g.size(); ++i) {
        bits[i] = g[i] < threshold ? 1 : 0;
    }
    return mask;
}

MaskedPair prepare_channel(const MultiImage& ref8, const MultiImage& raw, int channel,
                           const AlignmentConfig& config) {
    if (ref8.width() != raw.width() || ref8.height() != raw.height()) {
        throw InvalidParameterError("estimate_alpha: images must share dimensions");
    }
    MaskedPair pair{gaussian_blur(ref8.channel(channel), config.blur_sigma),
                    gaussian_blur(raw.channel(channel), config.blur_sigma),
                    PixelMask()};
    pair.mask = low_gradient_mask(pair.ref_blur, config.gradient_threshold);

    const std::size_t support = pair.mask.count();
    if (support < config.min_mask_support) {
        throw InsufficientSupportError("low-gradient mask has " + std::to_string(support) +
                                       " pixels, below the minimum of " +
                                       std::to_string(config.min_mask_support));
    }
    const std::vector<double>& ref = pair.ref_blur.samples();
    const std::vector<double>& rawv = pair.raw_blur.samples();
    const std::vector<std::uint8_t>& bits = pair.mask.bits();
    double sum_ref = 0.0;
    double sum_raw = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (bits[i]) {
            sum_ref += ref[i];
            sum_raw += rawv[i];
        }
    }
    pair.mean_ref = sum_ref / static_cast<double>(support);
    pair.mean_raw = sum_raw / static_cast<double>(support);
    return pair;
}

template <typename Objective>
AlphaEstimate search_alpha(Objective&& objective, double alpha0, std::size_t mask_size,
                           const AlignmentConfig& config) {
    const double lo = config.bracket_lo_factor * alpha0;
    const double hi = config.bracket_hi_factor * alpha0;
    const GoldenResult res =
        golden_section_minimize(objective, lo, hi, config.search_rel_tol, config.max_iterations);
    AlphaEstimate est;
    est.alpha = res.x;
    est.objective_value = res.fx;
    est.mask_size = mask_size;
    est.iterations = res.iterations;
    est.converged = res.converged;
    return est;
}

}  // namespace

AlphaEstimate estimate_alpha(const MultiImage& ref8, const MultiImage& raw, int channel,
                             const AlignmentConfig& config) {
    const MaskedPair pair = prepare_channel(ref8, raw, channel, config);
    if (!(pair.mean_raw > 0.0) || !(pair.mean_ref > 0.0)) {
        throw DegenerateImageError("estimate_alpha: masked channel mean is zero");
    }
    const double alpha0 = pair.mean_ref / pair.mean_raw;
    auto objective = [&pair](double a) {
        return alignment_objective(pair.ref_blur, pair.raw_blur, pair.mask, a);
    };
    return search_alpha(objective, alpha0, pair.mask.count(), config);
}

AlphaEstimate estimate_alpha_joint(const MultiImage& ref8, const MultiImage& raw,
                                   const AlignmentConfig& config) {
    std::vector<MaskedPair> pairs;
    pairs.reserve(3);
    double sum_ref = 0.0;
    double sum_raw = 0.0;
    std::size_t support = 0;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        pairs.push_back(prepare_channel(ref8, raw, c, config));
        const std::size_t n = pairs.back().mask.count();
        sum_ref += pairs.back().mean_ref * static_cast<double>(n);
        sum_raw += pairs.back().mean_raw * static_cast<double>(n);
        support += n;
    }
    if (!(sum_raw > 0.0) || !(sum_ref > 0.0)) {
        throw DegenerateImageError("estimate_alpha_joint: masked mean is zero");
    }
    const double alpha0 = sum_ref / sum_raw;
    auto objective = [&pairs](double a) {
        double total = 0.0;
        for (const MaskedPair& pair : pairs) {
            total += alignment_objective(pair.ref_blur, pair.raw_blur, pair.mask, a);
        }
        return total;
    };
    return search_alpha(objective, alpha0, support, config);
}

double alignment_noise_bound() {
    return 1.96 * std::sqrt(2.0) * sigma_from_psnr(35.0);
}

AlignmentDiagnostics compute_alignment_diagnostics(const MultiImage& ref8, const MultiImage& aligned) {
    if (ref8.width() != aligned.width() || ref8.height() != aligned.height()) {
        throw InvalidParameterError("diagnostics: images must share dimensions");
    }
    // 256 unit-width bins indexed by the rounded reference intensity, pooled
    // over channels.
    std::vector<std::vector<double>> diffs(256);
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const std::vector<double>& ref = ref8.channel(c).samples();
        const std::vector<double>& img = aligned.channel(c).samples();
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const int bin = std::clamp(static_cast<int>(std::lround(ref[i])), 0, 255);
            diffs[static_cast<std::size_t>(bin)].push_back(img[i] - ref[i]);
        }
    }
    AlignmentDiagnostics diag;
    diag.noise_bound = alignment_noise_bound();
    diag.bins.reserve(256);
    for (int bin = 0; bin < 256; ++bin) {
        std::vector<double>& d = diffs[static_cast<std::size_t>(bin)];
        DiagnosticsBin row;
        row.bin_center = static_cast<double>(bin);
        row.count = d.size();
        if (!d.empty()) {
            double sum = 0.0;
            for (double v : d) {
                sum += v;
            }
            row.mean_diff = sum / static_cast<double>(d.size());
            std::sort(d.begin(), d.end());
            const auto at = [&d](double q) {
                const double pos = q * static_cast<double>(d.size() - 1);
                const std::size_t lo = static_cast<std::size_t>(pos);
                const std::size_t hi = std::min(lo + 1, d.size() - 1);
                const double frac = pos - static_cast<double>(lo);
                return d[lo] + frac * (d[hi] - d[lo]);
            };
            row.p2_5 = at(0.025);
            row.p97_5 = at(0.975);
        }
        diag.bins.push_back(row);
    }
    return diag;
}

AlignedImage align_image(const MultiImage& ref8, const MultiImage& raw, const AlignmentConfig& config) {
    std::array<AlphaEstimate, 3> alpha;
    if (config.per_channel_alpha) {
        for (int c = 0; c < MultiImage::kChannels; ++c) {
            alpha[static_cast<std::size_t>(c)] = estimate_alpha(ref8, raw, c, config);
        }
    } else {
        const AlphaEstimate joint = estimate_alpha_joint(ref8, raw, config);
        alpha.fill(joint);
    }
    MultiImage image = scale_clamp(
        raw, std::array<double, 3>{alpha[0].alpha, alpha[1].alpha, alpha[2].alpha}, 0.0, 255.0);
    AlignmentDiagnostics diagnostics = compute_alignment_diagnostics(ref8, image);
    return AlignedImage{std::move(image), alpha, std::move(diagnostics)};
}

AlignedScene align_scene(const SceneBundle& bundle, const AlignmentConfig& config) {
    if (bundle.reference.empty() || bundle.clean.empty()) {
        throw InvalidParameterError("align_scene: bundle needs reference and clean groups");
    }
    // Averaging happens in the raw domain, before any estimation.
    const MultiImage raw_ref = average_images(bundle.reference);
    const MultiImage raw_clean = average_images(bundle.clean);

    const ReferenceGamma gamma = compute_reference_gamma(raw_ref, config.anchor);
    MultiImage ref8 = scale_clamp(raw_ref, gamma.gamma, 0.0, 255.0);

    AlignedImage clean = [&] {
        try {
            return align_image(ref8, raw_clean, config);
        } catch (const Error& e) {
            throw Error("clean image: " + std::string(e.what()));
        }
    }();
    std::vector<AlignedImage> noisy;
    noisy.reserve(bundle.noisy.size());
    for (std::size_t i = 0; i < bundle.noisy.size(); ++i) {
        try {
            noisy.push_back(align_image(ref8, bundle.noisy[i], config));
        } catch (const Error& e) {
            throw Error("noisy image " + std::to_string(i) + ": " + e.what());
        }
    }
    return AlignedScene{std::move(ref8), gamma, std::move(clean), std::move(noisy)};
}

void write_diagnostics_csv(const AlignmentDiagnostics& diagnostics, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "bin_center,mean_diff,p2.5_diff,p97.5_diff,count\n";
    char line[160];
    for (const DiagnosticsBin& bin : diagnostics.bins) {
        std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g,%zu\n", bin.bin_center,
                      bin.mean_diff, bin.p2_5, bin.p97_5, bin.count);
        out << line;
    }
}

}  // namespace noisepair
