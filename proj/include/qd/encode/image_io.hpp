#pragma once

#include <filesystem>

#include "qd/encode/image.hpp"

namespace qd {

// Binary 16-bit PGM of one channel (values in [0, 1] scaled to 65535).
void write_pgm16(const std::filesystem::path& path, const Image& image, int channel = 0);
// Binary 16-bit PPM from three consecutive channels starting at `first_channel`.
void write_ppm16(const std::filesystem::path& path, const Image& image, int first_channel = 1);

}  // namespace qd
