#include "noisepair/plane_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisepair/errors.hpp"

namespace noisepair {

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidParameterError("Gaussian sigma must be positive, got " + std::to_string(sigma));
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        sum += w;
    }
    for (double& w : kernel) {
        w /= sum;
    }
    return kernel;
}

RasterPlane gaussian_blur(const RasterPlane& plane, double sigma) {
    const std::vector<double> kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = plane.width();
    const int h = plane.height();
    const std::vector<double>& src = plane.samples();

    // Horizontal pass, indices clamped to the row for edge replication.
    std::vector<double> horiz(src.size());
    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + static_cast<std::size_t>(y) * w;
        double* out = horiz.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = std::clamp(x + k, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * row[xx];
            }
            out[x] = acc;
        }
    }

    // Vertical pass over the horizontal result, row-major accumulation.
    std::vector<double> out(src.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        double* dst = out.data() + static_cast<std::size_t>(y) * w;
        for (int k = -radius; k <= radius; ++k) {
            const int yy = std::clamp(y + k, 0, h - 1);
            const double weight = kernel[static_cast<std::size_t>(k + radius)];
            const double* row = horiz.data() + static_cast<std::size_t>(yy) * w;
            for (int x = 0; x < w; ++x) {
                dst[x] += weight * row[x];
            }
        }
    }
    return RasterPlane(w, h, std::move(out));
}

RasterPlane gradient_magnitude(const RasterPlane& plane) {
    const int w = plane.width();
    const int h = plane.height();
    if (w < 2 || h < 2) {
        throw InvalidParameterError("gradient_magnitude needs at least 2x2 samples, got " +
                                    std::to_string(w) + "x" + std::to_string(h));
    }
    std::vector<double> out(plane.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx;
            if (x == 0) {
                gx = plane(1, y) - plane(0, y);
            } else if (x == w - 1) {
                gx = plane(w - 1, y) - plane(w - 2, y);
            } else {
                gx = 0.5 * (plane(x + 1, y) - plane(x - 1, y));
            }
            double gy;
            if (y == 0) {
                gy = plane(x, 1) - plane(x, 0);
            } else if (y == h - 1) {
                gy = plane(x, h - 1) - plane(x, h - 2);
            } else {
                gy = 0.5 * (plane(x, y + 1) - plane(x, y - 1));
            }
            out[static_cast<std::size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return RasterPlane(w, h, std::move(out));
}

}  // namespace noisepair
