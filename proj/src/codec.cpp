#include "noisepair/codec.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "noisepair/errors.hpp"

namespace noisepair {

namespace {

class ByteReader {
public:
    explicit ByteReader(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("cannot open " + path.string());
        }
        data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    std::size_t pos() const { return pos_; }
    std::size_t size() const { return data_.size(); }

    bool eof() const { return pos_ >= data_.size(); }

    std::uint8_t peek() const {
        if (eof()) {
            throw FormatError(path_.string() + ": unexpected end of file", pos_);
        }
        return static_cast<std::uint8_t>(data_[pos_]);
    }

    std::uint8_t next() {
        const std::uint8_t b = peek();
        ++pos_;
        return b;
    }

    const std::uint8_t* payload(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw FormatError(path_.string() + ": payload truncated, need " + std::to_string(n) +
                                  " bytes but only " + std::to_string(data_.size() - pos_) + " remain",
                              data_.size());
        }
        return reinterpret_cast<const std::uint8_t*>(data_.data()) + pos_;
    }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::string data_;
    std::size_t pos_ = 0;
};

// Skips PNM whitespace and '#' comments running to end of line.
void skip_pnm_space(ByteReader& r) {
    while (!r.eof()) {
        const std::uint8_t b = r.peek();
        if (std::isspace(b)) {
            r.next();
        } else if (b == '#') {
            while (!r.eof() && r.peek() != '\n') {
                r.next();
            }
        } else {
            return;
        }
    }
}

long parse_pnm_int(ByteReader& r, const char* what) {
    skip_pnm_space(r);
    const std::size_t start = r.pos();
    long value = 0;
    bool any = false;
    while (!r.eof() && std::isdigit(r.peek())) {
        value = value * 10 + (r.next() - '0');
        any = true;
        if (value > 1000000000L) {
            throw FormatError(r.path().string() + ": " + what + " out of range", start);
        }
    }
    if (!any) {
        throw FormatError(r.path().string() + ": expected " + std::string(what), r.pos());
    }
    return value;
}

std::uint16_t to_u16(double v, double hi) {
    const double clamped = std::min(std::max(static_cast<double>(std::llround(v)), 0.0), hi);
    return static_cast<std::uint16_t>(clamped);
}

void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

}  // namespace

MultiImage read_pnm(const std::filesystem::path& path) {
    ByteReader r(path);
    if (r.size() < 2 || r.next() != 'P' || r.next() != '6') {
        throw FormatError(path.string() + ": not a binary P6 PNM file", 0);
    }
    const long width = parse_pnm_int(r, "width");
    const long height = parse_pnm_int(r, "height");
    const long maxval = parse_pnm_int(r, "maxval");
    if (width < 1 || height < 1) {
        throw FormatError(path.string() + ": bad dimensions " + std::to_string(width) + "x" +
                              std::to_string(height),
                          r.pos());
    }
    if (maxval != 255 && maxval != 65535) {
        throw FormatError(path.string() + ": unsupported maxval " + std::to_string(maxval), r.pos());
    }
    // Exactly one whitespace byte separates the header from the payload.
    if (r.eof() || !std::isspace(r.peek())) {
        throw FormatError(path.string() + ": missing whitespace after maxval", r.pos());
    }
    r.next();

    const int w = static_cast<int>(width);
    const int h = static_cast<int>(height);
    const std::size_t pixels = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const std::size_t bytes_per_sample = maxval == 65535 ? 2 : 1;
    const std::uint8_t* p = r.payload(pixels * 3 * bytes_per_sample);

    std::array<std::vector<double>, 3> planes;
    for (auto& plane : planes) {
        plane.resize(pixels);
    }
    if (bytes_per_sample == 1) {
        for (std::size_t i = 0; i < pixels; ++i) {
            planes[0][i] = p[3 * i + 0];
            planes[1][i] = p[3 * i + 1];
            planes[2][i] = p[3 * i + 2];
        }
    } else {
        // PNM stores 16-bit samples most significant byte first.
        for (std::size_t i = 0; i < pixels; ++i) {
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t off = (3 * i + c) * 2;
                planes[c][i] = static_cast<double>((static_cast<unsigned>(p[off]) << 8) | p[off + 1]);
            }
        }
    }
    const Domain domain = maxval == 65535 ? Domain::Raw16 : Domain::Aligned8;
    return MultiImage(RasterPlane(w, h, std::move(planes[0])), RasterPlane(w, h, std::move(planes[1])),
                      RasterPlane(w, h, std::move(planes[2])), domain);
}

void write_pnm8(const MultiImage& image, const std::filesystem::path& path) {
    const int w = image.width();
    const int h = image.height();
    std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    out.reserve(out.size() + image.pixel_count() * 3);
    const std::vector<double>& red = image.channel(0).samples();
    const std::vector<double>& green = image.channel(1).samples();
    const std::vector<double>& blue = image.channel(2).samples();
    for (std::size_t i = 0; i < red.size(); ++i) {
        out.push_back(static_cast<char>(to_u16(red[i], 255.0)));
        out.push_back(static_cast<char>(to_u16(green[i], 255.0)));
        out.push_back(static_cast<char>(to_u16(blue[i], 255.0)));
    }
    write_file(path, out);
}

void write_pnm16(const MultiImage& image, const std::filesystem::path& path) {
    const int w = image.width();
    const int h = image.height();
    std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
    out.reserve(out.size() + image.pixel_count() * 6);
    const std::vector<double>& red = image.channel(0).samples();
    const std::vector<double>& green = image.channel(1).samples();
    const std::vector<double>& blue = image.channel(2).samples();
    for (std::size_t i = 0; i < red.size(); ++i) {
        for (const std::vector<double>* plane : {&red, &green, &blue}) {
            const std::uint16_t v = to_u16((*plane)[i], 65535.0);
            out.push_back(static_cast<char>((v >> 8) & 0xFF));
            out.push_back(static_cast<char>(v & 0xFF));
        }
    }
    write_file(path, out);
}

void write_bmp8(const MultiImage& image, const std::filesystem::path& path) {
    const int w = image.width();
    const int h = image.height();
    const std::size_t row_bytes = static_cast<std::size_t>(w) * 3;
    const std::size_t row_padded = (row_bytes + 3) & ~std::size_t{3};
    const std::uint32_t image_size = static_cast<std::uint32_t>(row_padded * static_cast<std::size_t>(h));
    const std::uint32_t file_size = 54 + image_size;

    std::string out;
    out.reserve(file_size);
    // BITMAPFILEHEADER
    out.push_back('B');
    out.push_back('M');
    put_u32le(out, file_size);
    put_u16le(out, 0);
    put_u16le(out, 0);
    put_u32le(out, 54);  // pixel data offset
    // BITMAPINFOHEADER
    put_u32le(out, 40);
    put_u32le(out, static_cast<std::uint32_t>(w));
    put_u32le(out, static_cast<std::uint32_t>(h));  // positive height: bottom-up
    put_u16le(out, 1);                              // planes
    put_u16le(out, 24);                             // bits per pixel
    put_u32le(out, 0);                              // BI_RGB
    put_u32le(out, image_size);
    put_u32le(out, 2835);  // 72 dpi in pixels per metre
    put_u32le(out, 2835);
    put_u32le(out, 0);
    put_u32le(out, 0);

    const std::vector<double>& red = image.channel(0).samples();
    const std::vector<double>& green = image.channel(1).samples();
    const std::vector<double>& blue = image.channel(2).samples();
    for (int y = h - 1; y >= 0; --y) {
        const std::size_t base = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
        for (int x = 0; x < w; ++x) {
            out.push_back(static_cast<char>(to_u16(blue[base + x], 255.0)));
            out.push_back(static_cast<char>(to_u16(green[base + x], 255.0)));
            out.push_back(static_cast<char>(to_u16(red[base + x], 255.0)));
        }
        for (std::size_t pad = row_bytes; pad < row_padded; ++pad) {
            out.push_back('\0');
        }
    }
    write_file(path, out);
}

}  // namespace noisepair
