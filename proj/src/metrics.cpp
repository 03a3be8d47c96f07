#include "noisepair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "noisepair/errors.hpp"
#include "noisepair/plane_ops.hpp"

namespace noisepair {

namespace {

constexpr double kPeak = 255.0;
constexpr double kC1 = (0.01 * kPeak) * (0.01 * kPeak);
constexpr double kC2 = (0.03 * kPeak) * (0.03 * kPeak);
constexpr double kSsimWindowSigma = 1.5;
constexpr int kSsimWindowRadius = 5;  // 11x11 window

double channel_mse(const RasterPlane& a, const RasterPlane& b, const PixelMask* mask) {
    const std::vector<double>& sa = a.samples();
    const std::vector<double>& sb = b.samples();
    double sum = 0.0;
    std::size_t n = 0;
    if (mask == nullptr) {
        for (std::size_t i = 0; i < sa.size(); ++i) {
            const double d = sa[i] - sb[i];
            sum += d * d;
        }
        n = sa.size();
    } else {
        const std::vector<std::uint8_t>& bits = mask->bits();
        for (std::size_t i = 0; i < sa.size(); ++i) {
            if (bits[i]) {
                const double d = sa[i] - sb[i];
                sum += d * d;
                ++n;
            }
        }
    }
    if (n == 0) {
        throw InsufficientSupportError("psnr_mse: empty valid-pixel set");
    }
    return sum / static_cast<double>(n);
}

double psnr_of_mse(double mse) {
    if (mse <= 0.0) {
        return kPsnrCapDb;
    }
    return std::min(10.0 * std::log10(kPeak * kPeak / mse), kPsnrCapDb);
}

// Gaussian window moments restricted to fully interior positions, so border
// replication never leaks into the statistics.
struct SsimMoments {
    RasterPlane mu_a;
    RasterPlane mu_b;
    RasterPlane a_sq;
    RasterPlane b_sq;
    RasterPlane ab;
};

}  // namespace

double psnr_mse(const MultiImage& a, const MultiImage& b, const PixelMask* mask) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw InvalidParameterError("psnr_mse: images must share dimensions");
    }
    double total = 0.0;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        total += channel_mse(a.channel(c), b.channel(c), mask);
    }
    return psnr_of_mse(total / 3.0);
}

double psnr_from_sigma(double sigma) {
    if (sigma < 0.0) {
        throw InvalidParameterError("psnr_from_sigma: sigma must be non-negative");
    }
    if (sigma == 0.0) {
        return kPsnrCapDb;
    }
    return std::min(20.0 * std::log10(kPeak / sigma), kPsnrCapDb);
}

double sigma_from_psnr(double psnr_db) {
    return kPeak * std::pow(10.0, -psnr_db / 20.0);
}

double ssim_plane(const RasterPlane& a, const RasterPlane& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw InvalidParameterError("ssim: images must share dimensions");
    }
    const int w = a.width();
    const int h = a.height();
    if (w < 2 * kSsimWindowRadius + 1 || h < 2 * kSsimWindowRadius + 1) {
        throw InvalidParameterError("ssim: images must be at least 11x11");
    }

    const std::vector<double>& sa = a.samples();
    const std::vector<double>& sb = b.samples();
    std::vector<double> a_sq(sa.size());
    std::vector<double> b_sq(sa.size());
    std::vector<double> ab(sa.size());
    for (std::size_t i = 0; i < sa.size(); ++i) {
        a_sq[i] = sa[i] * sa[i];
        b_sq[i] = sb[i] * sb[i];
        ab[i] = sa[i] * sb[i];
    }

    // gaussian_kernel(1.5) truncates at ceil(4.5) = 5, giving the standard
    // 11-tap window.
    const std::vector<double> kernel = gaussian_kernel(kSsimWindowSigma);
    const auto window = [&kernel, w, h](const std::vector<double>& src) {
        std::vector<double> horiz(src.size());
        const int r = kSsimWindowRadius;
        for (int y = 0; y < h; ++y) {
            const double* row = src.data() + static_cast<std::size_t>(y) * w;
            double* out = horiz.data() + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = -r; k <= r; ++k) {
                    const int xx = std::clamp(x + k, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(k + r)] * row[xx];
                }
                out[x] = acc;
            }
        }
        std::vector<double> out(src.size(), 0.0);
        for (int y = 0; y < h; ++y) {
            double* dst = out.data() + static_cast<std::size_t>(y) * w;
            for (int k = -r; k <= r; ++k) {
                const int yy = std::clamp(y + k, 0, h - 1);
                const double weight = kernel[static_cast<std::size_t>(k + r)];
                const double* row = horiz.data() + static_cast<std::size_t>(yy) * w;
                for (int x = 0; x < w; ++x) {
                    dst[x] += weight * row[x];
                }
            }
        }
        return out;
    };

    const std::vector<double> mu_a = window(sa);
    const std::vector<double> mu_b = window(sb);
    const std::vector<double> m_aa = window(a_sq);
    const std::vector<double> m_bb = window(b_sq);
    const std::vector<double> m_ab = window(ab);

    double total = 0.0;
    std::size_t n = 0;
    for (int y = kSsimWindowRadius; y < h - kSsimWindowRadius; ++y) {
        for (int x = kSsimWindowRadius; x < w - kSsimWindowRadius; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double ma = mu_a[i];
            const double mb = mu_b[i];
            const double var_a = m_aa[i] - ma * ma;
            const double var_b = m_bb[i] - mb * mb;
            const double cov = m_ab[i] - ma * mb;
            const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
            const double den = (ma * ma + mb * mb + kC1) * (var_a + var_b + kC2);
            total += num / den;
            ++n;
        }
    }
    return total / static_cast<double>(n);
}

double ssim(const MultiImage& a, const MultiImage& b) {
    double total = 0.0;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        total += ssim_plane(a.channel(c), b.channel(c));
    }
    return total / 3.0;
}

MetricResult compute_metrics(const MultiImage& image, const MultiImage& reference,
                             ReferenceKind kind, const PixelMask* mask) {
    MetricResult result;
    result.reference_kind = kind;
    double ssim_total = 0.0;
    double mse_total = 0.0;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const double mse = channel_mse(image.channel(c), reference.channel(c), mask);
        result.psnr_channel[static_cast<std::size_t>(c)] = psnr_of_mse(mse);
        mse_total += mse;
        const double s = ssim_plane(image.channel(c), reference.channel(c));
        result.ssim_channel[static_cast<std::size_t>(c)] = s;
        ssim_total += s;
    }
    result.psnr_db = psnr_of_mse(mse_total / 3.0);
    result.ssim = ssim_total / 3.0;
    return result;
}

}  // namespace noisepair
