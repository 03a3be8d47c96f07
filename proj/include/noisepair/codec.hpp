#pragma once

#include <filesystem>

#include "noisepair/raster.hpp"

namespace noisepair {

// Binary P6 PNM reader. maxval 65535 (big-endian sample pairs) produces a
// Raw16 image, maxval 255 an Aligned8 image. Malformed headers, unsupported
// maxvals and truncated payloads raise FormatError with the byte offset.
MultiImage read_pnm(const std::filesystem::path& path);

// P6 writers. Samples are rounded half away from zero and clamped before
// being written, so integer-valued in-range images round-trip bit-exactly.
void write_pnm8(const MultiImage& image, const std::filesystem::path& path);
void write_pnm16(const MultiImage& image, const std::filesystem::path& path);

// Uncompressed 24-bit bottom-up BI_RGB bitmap.
void write_bmp8(const MultiImage& image, const std::filesystem::path& path);

}  // namespace noisepair
