#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sqm::detail {

/// Minimal 16-bit RGB PNG reader/writer. Pixels are row-major from the top
/// row, three channels per pixel.
struct Png16 {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> pixels;  // width * height * 3
};

void write_png16(const std::string& path, const Png16& img);
Png16 read_png16(const std::string& path);

}  // namespace sqm::detail
