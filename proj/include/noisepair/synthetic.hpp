#pragma once

#include <cstdint>

#include "noisepair/raster.hpp"
#include "noisepair/rng.hpp"

namespace noisepair {

// Generators for synthetic scenes: smooth ground-truth fields, ramps and
// noisy captures with known statistics. Used by the validation harnesses and
// the test fixtures.

// Smooth random field in [lo, hi]: white noise blurred with smooth_sigma and
// rescaled. Large smooth_sigma gives gentle gradients that mostly pass the
// low-gradient alignment mask.
RasterPlane smooth_field(int width, int height, double lo, double hi, double smooth_sigma,
                         GaussianSampler& rng);

// Three-channel smooth 16-bit ground truth in [lo, hi]; channels differ by
// mild per-channel scaling so per-channel gains are observable.
MultiImage synth_gt16(int width, int height, double lo, double hi, std::uint64_t seed);

// Horizontal linear ramp from lo at x = 0 to hi at x = width - 1, same in
// every channel.
MultiImage ramp_image(int width, int height, double lo, double hi, Domain domain);

MultiImage constant_image(int width, int height, double value, Domain domain);

// image + N(0, sigma^2) i.i.d. per sample, clamped to the domain range.
MultiImage add_gaussian_noise(const MultiImage& image, double sigma, GaussianSampler& rng);

// image + N(0, sigma(t)^2) where sigma(t)^2 = slope * t + intercept and t is
// the local ground-truth sample (8-bit scale), clamped to the domain range.
MultiImage add_signal_dependent_noise(const MultiImage& image, double slope, double intercept,
                                      GaussianSampler& rng);

}  // namespace noisepair
