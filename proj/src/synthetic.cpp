#include "noisepair/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "noisepair/errors.hpp"
#include "noisepair/plane_ops.hpp"

namespace noisepair {

RasterPlane smooth_field(int width, int height, double lo, double hi, double smooth_sigma,
                         GaussianSampler& rng) {
    if (!(lo < hi)) {
        throw InvalidParameterError("smooth_field requires lo < hi");
    }
    std::vector<double> noise(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (double& v : noise) {
        v = rng.gaussian();
    }
    RasterPlane blurred = gaussian_blur(RasterPlane(width, height, std::move(noise)), smooth_sigma);
    const auto [min_it, max_it] = std::minmax_element(blurred.samples().begin(), blurred.samples().end());
    const double span = *max_it - *min_it;
    const double scale = span > 0.0 ? (hi - lo) / span : 0.0;
    const double base = *min_it;
    for (double& v : blurred.samples()) {
        v = lo + (v - base) * scale;
    }
    return blurred;
}

MultiImage synth_gt16(int width, int height, double lo, double hi, std::uint64_t seed) {
    GaussianSampler rng(seed);
    const double mid = 0.5 * (lo + hi);
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < 3; ++c) {
        // Shrink each channel's span around the midpoint by a slightly
        // different factor so the per-channel gains differ.
        const double shrink = 1.0 - 0.06 * static_cast<double>(c);
        const double c_lo = mid - (mid - lo) * shrink;
        const double c_hi = mid + (hi - mid) * shrink;
        planes[static_cast<std::size_t>(c)] =
            smooth_field(width, height, c_lo, c_hi, 18.0, rng);
    }
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), Domain::Raw16);
}

MultiImage ramp_image(int width, int height, double lo, double hi, Domain domain) {
    std::vector<double> row(static_cast<std::size_t>(width));
    const double step = width > 1 ? (hi - lo) / static_cast<double>(width - 1) : 0.0;
    for (int x = 0; x < width; ++x) {
        row[static_cast<std::size_t>(x)] = lo + step * static_cast<double>(x);
    }
    std::vector<double> samples(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        std::copy(row.begin(), row.end(), samples.begin() + static_cast<std::ptrdiff_t>(y) * width);
    }
    RasterPlane plane(width, height, std::move(samples));
    return MultiImage(plane, plane, plane, domain);
}

MultiImage constant_image(int width, int height, double value, Domain domain) {
    RasterPlane plane(width, height, value);
    return MultiImage(plane, plane, plane, domain);
}

MultiImage add_gaussian_noise(const MultiImage& image, double sigma, GaussianSampler& rng) {
    if (sigma < 0.0) {
        throw InvalidParameterError("add_gaussian_noise: sigma must be non-negative");
    }
    const double hi = domain_max(image.domain());
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        std::vector<double> out = image.channel(c).samples();
        for (double& v : out) {
            v = std::min(std::max(v + sigma * rng.gaussian(), 0.0), hi);
        }
        planes[static_cast<std::size_t>(c)] = RasterPlane(image.width(), image.height(), std::move(out));
    }
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), image.domain());
}

MultiImage add_signal_dependent_noise(const MultiImage& image, double slope, double intercept,
                                      GaussianSampler& rng) {
    const double hi = domain_max(image.domain());
    std::array<RasterPlane, 3> planes;
    for (int c = 0; c < MultiImage::kChannels; ++c) {
        std::vector<double> out = image.channel(c).samples();
        for (double& v : out) {
            const double variance = std::max(slope * v + intercept, 0.0);
            v = std::min(std::max(v + std::sqrt(variance) * rng.gaussian(), 0.0), hi);
        }
        planes[static_cast<std::size_t>(c)] = RasterPlane(image.width(), image.height(), std::move(out));
    }
    return MultiImage(std::move(planes[0]), std::move(planes[1]), std::move(planes[2]), image.domain());
}

}  // namespace noisepair
