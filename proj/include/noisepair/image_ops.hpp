#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "noisepair/raster.hpp"

namespace noisepair {

// Smallest sample value v over all channels pooled such that at least p% of
// the samples are <= v (empirical CDF inversion). p must lie in (0, 100].
double percentile(const MultiImage& image, double p);

// out = min(max(gain * in, lo), hi) per sample, one gain per channel.
// The result is tagged Aligned8 when [lo, hi] == [0, 255], Raw16 otherwise.
MultiImage scale_clamp(const MultiImage& image, const std::array<double, 3>& gain, double lo, double hi);
MultiImage scale_clamp(const MultiImage& image, double gain, double lo, double hi);

struct ChannelStats {
    double mean = 0.0;
    double variance = 0.0;  // population convention (divide by N)
    double stddev = 0.0;
    std::size_t count = 0;
    bool low_support = false;
};

struct DiffStats {
    std::array<ChannelStats, 3> channel;
    ChannelStats pooled;  // all three channels concatenated
};

// Statistics of (a - b) restricted to the mask (two-pass, deterministic
// order). A null mask means all pixels.
DiffStats masked_diff_stats(const MultiImage& a, const MultiImage& b, const PixelMask* mask = nullptr);

// Per-sample mean of a group of same-domain, same-size images.
MultiImage average_images(const std::vector<MultiImage>& group);

MultiImage crop_image(const MultiImage& image, const CropRect& rect);

// Round-half-away-from-zero to the integer grid, clamped to the domain range.
// This is the value an image takes after a write/read round trip.
MultiImage quantize_to_integers(const MultiImage& image);

}  // namespace noisepair
