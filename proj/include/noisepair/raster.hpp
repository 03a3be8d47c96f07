#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace noisepair {

// Value domain of an image. Samples are stored as doubles either way; the
// tag fixes the valid range and the integer scale used on I/O.
enum class Domain { Raw16, Aligned8 };

double domain_max(Domain d);
const char* domain_name(Domain d);

// One channel of real-valued samples in row-major order.
class RasterPlane {
public:
    RasterPlane() = default;
    RasterPlane(int width, int height, double fill = 0.0);
    // Validates samples.size() == width * height and that every sample is finite.
    RasterPlane(int width, int height, std::vector<double> samples);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return samples_.size(); }

    double operator()(int x, int y) const { return samples_[index(x, y)]; }
    double& operator()(int x, int y) { return samples_[index(x, y)]; }

    const std::vector<double>& samples() const { return samples_; }
    std::vector<double>& samples() { return samples_; }

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> samples_;
};

// Three channel planes (red, green, blue) of identical size plus the domain
// tag. Construction validates dimensions and that samples sit inside the
// domain range (with a 1e-6 slack for accumulated rounding).
class MultiImage {
public:
    static constexpr int kChannels = 3;

    MultiImage(RasterPlane red, RasterPlane green, RasterPlane blue, Domain domain);

    int width() const { return channels_[0].width(); }
    int height() const { return channels_[0].height(); }
    std::size_t pixel_count() const { return channels_[0].size(); }
    Domain domain() const { return domain_; }

    const RasterPlane& channel(int c) const { return channels_[static_cast<std::size_t>(c)]; }

private:
    std::array<RasterPlane, 3> channels_;
    Domain domain_;
};

// Per-pixel boolean mask sharing the dimensions of the planes it selects.
class PixelMask {
public:
    PixelMask() = default;
    PixelMask(int width, int height, bool initial = false);

    static PixelMask full(int width, int height) { return PixelMask(width, height, true); }

    int width() const { return width_; }
    int height() const { return height_; }

    bool test(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool value) { bits_[index(x, y)] = value ? 1 : 0; }

    std::size_t count() const;

    const std::vector<std::uint8_t>& bits() const { return bits_; }
    std::vector<std::uint8_t>& bits() { return bits_; }

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct CropRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

}  // namespace noisepair
