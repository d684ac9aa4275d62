#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vbx/image.hpp"

namespace vbx {

// Decodes an 8-bit PNG (grayscale, palette, RGB or RGBA) into a GrayImage.
// Multi-channel pixels are averaged over the color channels before the
// division by 255; 16-bit files are reduced to 8 bits first.
GrayImage read_png_gray(const std::string& path);

// 8-bit grayscale writer; `bytes` is row-major, height*width entries.
void write_png_gray8(const std::string& path, int height, int width,
                     const std::vector<std::uint8_t>& bytes);

// 8-bit RGB writer; `bytes` is row-major, interleaved, height*width*3 entries.
void write_png_rgb8(const std::string& path, int height, int width,
                    const std::vector<std::uint8_t>& bytes);

} // namespace vbx
