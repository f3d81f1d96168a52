#include "qd/encode/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qd/error.hpp"

namespace qd {

namespace {

void put16(std::ofstream& out, float v) {
  auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0f, 1.0f) * 65535.0f));
  out.put(static_cast<char>((q >> 8) & 0xff));
  out.put(static_cast<char>(q & 0xff));
}

}  // namespace

void write_pgm16(const std::filesystem::path& path, const Image& image, int channel) {
  if (channel < 0 || channel >= image.channels) throw InvalidArgument("write_pgm16: channel out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << image.cols << ' ' << image.rows << "\n65535\n";
  for (int r = 0; r < image.rows; ++r)
    for (int c = 0; c < image.cols; ++c) put16(out, image.at(channel, r, c));
}

void write_ppm16(const std::filesystem::path& path, const Image& image, int first_channel) {
  if (first_channel < 0 || first_channel + 3 > image.channels)
    throw InvalidArgument("write_ppm16: channel out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P6\n" << image.cols << ' ' << image.rows << "\n65535\n";
  for (int r = 0; r < image.rows; ++r)
    for (int c = 0; c < image.cols; ++c)
      for (int k = 0; k < 3; ++k) put16(out, image.at(first_channel + k, r, c));
}

}  // namespace qd
