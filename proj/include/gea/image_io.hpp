#pragma once

#include "gea/image.hpp"

#include <filesystem>

namespace gea {

// Decodes PNG (8/16-bit) or JPEG to RGB in [0,1], dividing by the sample
// type maximum. Grayscale files are replicated to 3 channels, alpha dropped.
// Throws DataError when the file is missing or cannot be decoded.
ImageBuffer load_rgb(const std::filesystem::path& path);

// Writes an 8-bit PNG (1 or 3 channels). Samples are clamped to [0,1] and
// quantised with round-half-up: floor(v*255 + 0.5).
void save_png(const std::filesystem::path& path, const ImageBuffer& img);

// The quantisation save_png applies, exposed for tests and round-trip checks.
ImageBuffer quantize8(const ImageBuffer& img);

}  // namespace gea
