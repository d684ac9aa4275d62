#include "vbx/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>

#include "vbx/error.hpp"

namespace vbx {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

GrayImage read_png_gray(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw InputError("cannot open image file: " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        throw InputError("not a PNG file: " + path);
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw InputError("png reader allocation failed: " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw InputError("png info allocation failed: " + path);
    }

    std::vector<std::uint8_t> data;
    std::vector<png_bytep> rows;
    int height = 0, width = 0, channels = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("failed to decode PNG: " + path);
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_read_update_info(png, info);

    channels = png_get_channels(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    data.resize(row_bytes * height);
    rows.resize(height);
    for (int r = 0; r < height; ++r) rows[r] = data.data() + row_bytes * r;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    // Alpha, when present, is ignored; only color channels are averaged.
    const int color_channels = (channels == 2 || channels == 4) ? channels - 1 : channels;
    GrayImage out(height, width);
    for (int r = 0; r < height; ++r) {
        const std::uint8_t* row = data.data() + row_bytes * r;
        for (int c = 0; c < width; ++c) {
            unsigned sum = 0;
            for (int k = 0; k < color_channels; ++k) sum += row[c * channels + k];
            out.at(r, c) = static_cast<double>(sum) / (255.0 * color_channels);
        }
    }
    return out;
}

namespace {

void write_png(const std::string& path, int height, int width,
               const std::vector<std::uint8_t>& bytes, int channels, int color_type) {
    const std::size_t expected = static_cast<std::size_t>(height) * width * channels;
    if (bytes.size() != expected) throw ShapeError("png writer: byte buffer size mismatch");

    const std::string tmp = path + ".tmp";
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw InputError("cannot open file for writing: " + tmp);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw InputError("png writer allocation failed: " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw InputError("png info allocation failed: " + path);
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InputError("failed to encode PNG: " + path);
    }

    png_init_io(png, fp.get());
    // Fixed settings so identical pixels always produce identical bytes.
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r) {
        rows[r] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(r) * width * channels);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    fp.reset();

    std::filesystem::rename(tmp, path);
}

} // namespace

void write_png_gray8(const std::string& path, int height, int width,
                     const std::vector<std::uint8_t>& bytes) {
    write_png(path, height, width, bytes, 1, PNG_COLOR_TYPE_GRAY);
}

void write_png_rgb8(const std::string& path, int height, int width,
                    const std::vector<std::uint8_t>& bytes) {
    write_png(path, height, width, bytes, 3, PNG_COLOR_TYPE_RGB);
}

} // namespace vbx
