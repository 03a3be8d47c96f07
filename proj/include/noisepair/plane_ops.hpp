#pragma once

#include <vector>

#include "noisepair/raster.hpp"

namespace noisepair {

// Normalized 1-D Gaussian kernel truncated at radius ceil(3 * sigma).
// Returned vector has 2 * radius + 1 taps summing to 1.
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian convolution with edge replication at the borders.
// Output dimensions match the input.
RasterPlane gaussian_blur(const RasterPlane& plane, double sigma);

// Per-pixel sqrt(gx^2 + gy^2) with central differences in the interior and
// one-sided differences on the borders. Requires width >= 2 and height >= 2.
RasterPlane gradient_magnitude(const RasterPlane& plane);

}  // namespace noisepair
