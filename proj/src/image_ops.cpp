#include "noisepair/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisepair/errors.hpp"

namespace noisepair {

double percentile(const MultiImage& image, double p) {
    if (!(p > 0.0) || p > 100.0) {
        throw InvalidParameterError("percentile p must be in (0, 100], got " + std::to_string(p));
    }
    std::vector<double> pooled;
    pooled.reserve(image.pixel_count() * MultiImage::kChannels);
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const std::vector<double>& s = image.channel(c).samples();
        pooled.insert(pooled.end(), s.begin(), s.end());
    }
    const std::size_t n = pooled.size();
    // Smallest rank whose CDF reaches p%. The 1e-9 guards exact multiples of
    // 1/n against rounding up one rank.
    const long double target = static_cast<long double>(n) * static_cast<long double>(p) / 100.0L;
    std::size_t rank = static_cast<std::size_t>(std::ceil(static_cast<double>(target) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(rank - 1), pooled.end());
    return pooled[rank - 1];
}

MultiImage scale_clamp(const MultiImage& image, const std::array<double, 3>& gain, double lo, double hi) {
    for (double g : gain) {
        if (!(g > 0.0)) {
            throw InvalidParameterError("scale_clamp gain must be positive, got " + std::to_string(g));
        }
    }
    if (!(lo < hi)) {
        throw InvalidParameterError("scale_clamp requires lo < hi");
    }
    const int w = image.width();
    const int h = image.height();
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const std::vector<double>& src = image.channel(c).samples();
        std::vector<double> out(src.size());
        const double g = gain[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < src.size(); ++i) {
            out[i] = std::min(std::max(g * src[i], lo), hi);
        }
        planes[static_cast<std::size_t>(c)] = RasterPlane(w, h, std::move(out));
    }
    const Domain domain = (lo == 0.0 && hi == 255.0) ? Domain::Aligned8 : Domain::Raw16;
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), domain);
}

MultiImage scale_clamp(const MultiImage& image, double gain, double lo, double hi) {
    return scale_clamp(image, std::array<double, 3>{gain, gain, gain}, lo, hi);
}

namespace {

void check_same_size(const MultiImage& a, const MultiImage& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw InvalidParameterError("images must share dimensions");
    }
}

}  // namespace

DiffStats masked_diff_stats(const MultiImage& a, const MultiImage& b, const PixelMask* mask) {
    check_same_size(a, b);
    if (a.domain() != b.domain()) {
        throw InvalidParameterError("masked_diff_stats requires images in the same domain");
    }
    if (mask != nullptr && (mask->width() != a.width() || mask->height() != a.height())) {
        throw InvalidParameterError("mask dimensions must match the images");
    }

    const std::size_t n_pixels = a.pixel_count();
    std::size_t selected = n_pixels;
    if (mask != nullptr) {
        selected = mask->count();
        if (selected == 0) {
            throw InsufficientSupportError("masked_diff_stats: empty mask");
        }
    }

    DiffStats stats;
    // First pass: per-channel sums of the differences.
    std::array<double, 3> sums{0.0, 0.0, 0.0};
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const std::vector<double>& sa = a.channel(c).samples();
        const std::vector<double>& sb = b.channel(c).samples();
        double sum = 0.0;
        if (mask == nullptr) {
            for (std::size_t i = 0; i < n_pixels; ++i) {
                sum += sa[i] - sb[i];
            }
        } else {
            const std::vector<std::uint8_t>& bits = mask->bits();
            for (std::size_t i = 0; i < n_pixels; ++i) {
                if (bits[i]) {
                    sum += sa[i] - sb[i];
                }
            }
        }
        sums[static_cast<std::size_t>(c)] = sum;
    }

    const double pooled_mean = (sums[0] + sums[1] + sums[2]) / (3.0 * static_cast<double>(selected));

    // Second pass: squared deviations about the channel mean and the pooled mean.
    double pooled_sq = 0.0;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const std::vector<double>& sa = a.channel(c).samples();
        const std::vector<double>& sb = b.channel(c).samples();
        const double mean = sums[static_cast<std::size_t>(c)] / static_cast<double>(selected);
        double sq = 0.0;
        double pooled_part = 0.0;
        if (mask == nullptr) {
            for (std::size_t i = 0; i < n_pixels; ++i) {
                const double d = sa[i] - sb[i];
                const double dc = d - mean;
                sq += dc * dc;
                const double dp = d - pooled_mean;
                pooled_part += dp * dp;
            }
        } else {
            const std::vector<std::uint8_t>& bits = mask->bits();
            for (std::size_t i = 0; i < n_pixels; ++i) {
                if (bits[i]) {
                    const double d = sa[i] - sb[i];
                    const double dc = d - mean;
                    sq += dc * dc;
                    const double dp = d - pooled_mean;
                    pooled_part += dp * dp;
                }
            }
        }
        pooled_sq += pooled_part;
        ChannelStats& cs = stats.channel[static_cast<std::size_t>(c)];
        cs.count = selected;
        cs.mean = mean;
        cs.variance = sq / static_cast<double>(selected);
        cs.stddev = std::sqrt(cs.variance);
        cs.low_support = selected < 2;
    }

    stats.pooled.count = 3 * selected;
    stats.pooled.mean = pooled_mean;
    stats.pooled.variance = pooled_sq / static_cast<double>(3 * selected);
    stats.pooled.stddev = std::sqrt(stats.pooled.variance);
    stats.pooled.low_support = stats.pooled.count < 2;
    return stats;
}

MultiImage average_images(const std::vector<MultiImage>& group) {
    if (group.empty()) {
        throw InvalidParameterError("average_images: empty group");
    }
    const MultiImage& first = group.front();
    for (const MultiImage& img : group) {
        check_same_size(first, img);
        if (img.domain() != first.domain()) {
            throw InvalidParameterError("average_images: mixed domains in group");
        }
    }
    const int w = first.width();
    const int h = first.height();
    const double inv = 1.0 / static_cast<double>(group.size());
    const double hi = domain_max(first.domain());
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        std::vector<double> acc(first.pixel_count(), 0.0);
        for (const MultiImage& img : group) {
            const std::vector<double>& s = img.channel(c).samples();
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i] += s[i];
            }
        }
        for (double& v : acc) {
            v = std::min(std::max(v * inv, 0.0), hi);
        }
        planes[static_cast<std::size_t>(c)] = RasterPlane(w, h, std::move(acc));
    }
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), first.domain());
}

MultiImage crop_image(const MultiImage& image, const CropRect& rect) {
    if (rect.w < 1 || rect.h < 1 || rect.x < 0 || rect.y < 0 ||
        rect.x + rect.w > image.width() || rect.y + rect.h > image.height()) {
        throw InvalidParameterError("crop rectangle out of image bounds");
    }
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        const RasterPlane& src = image.channel(c);
        std::vector<double> out(static_cast<std::size_t>(rect.w) * static_cast<std::size_t>(rect.h));
        for (int y = 0; y < rect.h; ++y) {
            for (int x = 0; x < rect.w; ++x) {
                out[static_cast<std::size_t>(y) * rect.w + x] = src(rect.x + x, rect.y + y);
            }
        }
        planes[static_cast<std::size_t>(c)] = RasterPlane(rect.w, rect.h, std::move(out));
    }
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), image.domain());
}

MultiImage quantize_to_integers(const MultiImage& image) {
    const double hi = domain_max(image.domain());
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        std::vector<double> out = image.channel(c).samples();
        for (double& v : out) {
            v = std::min(std::max(static_cast<double>(std::llround(v)), 0.0), hi);
        }
        planes[static_cast<std::size_t>(c)] = RasterPlane(image.width(), image.height(), std::move(out));
    }
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), image.domain());
}

}  // namespace noisepair
