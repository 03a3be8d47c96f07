#include "noisepair/raster.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "noisepair/errors.hpp"

namespace noisepair {

double domain_max(Domain d) {
    return d == Domain::Raw16 ? 65535.0 : 255.0;
}

const char* domain_name(Domain d) {
    return d == Domain::Raw16 ? "raw16" : "aligned8";
}

RasterPlane::RasterPlane(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw InvalidParameterError("RasterPlane dimensions must be at least 1x1, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    if (!std::isfinite(fill)) {
        throw InvalidParameterError("RasterPlane fill value must be finite");
    }
    samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

RasterPlane::RasterPlane(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
    if (width < 1 || height < 1) {
        throw InvalidParameterError("RasterPlane dimensions must be at least 1x1, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (samples_.size() != expected) {
        throw InvalidParameterError("RasterPlane sample count " + std::to_string(samples_.size()) +
                                    " does not match " + std::to_string(width) + "x" + std::to_string(height));
    }
    for (double v : samples_) {
        if (!std::isfinite(v)) {
            throw InvalidParameterError("RasterPlane samples must be finite");
        }
    }
}

namespace {

// Slack for sums of in-range values that round a hair past the bound.
constexpr double kRangeSlack = 1e-6;

}  // namespace

MultiImage::MultiImage(RasterPlane red, RasterPlane green, RasterPlane blue, Domain domain)
    : channels_{std::move(red), std::move(green), std::move(blue)}, domain_(domain) {
    const int w = channels_[0].width();
    const int h = channels_[0].height();
    if (w < 1 || h < 1) {
        throw InvalidParameterError("MultiImage channels must be non-empty");
    }
    for (const RasterPlane& plane : channels_) {
        if (plane.width() != w || plane.height() != h) {
            throw InvalidParameterError("MultiImage channels must share dimensions");
        }
    }
    const double hi = domain_max(domain) + kRangeSlack;
    const double lo = -kRangeSlack;
    for (const RasterPlane& plane : channels_) {
        for (double v : plane.samples()) {
            if (v < lo || v > hi) {
                throw InvalidParameterError("MultiImage sample " + std::to_string(v) +
                                            " outside " + std::string(domain_name(domain)) + " range");
            }
        }
    }
}

PixelMask::PixelMask(int width, int height, bool initial)
    : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw InvalidParameterError("PixelMask dimensions must be at least 1x1");
    }
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), initial ? 1 : 0);
}

std::size_t PixelMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits_) {
        n += b;
    }
    return n;
}

}  // namespace noisepair
