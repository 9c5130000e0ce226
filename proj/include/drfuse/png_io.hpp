#pragma once

#include "drfuse/error.hpp"
#include "drfuse/mask.hpp"

#include <png.h>

#include <cstdio>
#include <csetjmp>
#include <filesystem>
#include <vector>

namespace drfuse {

namespace detail {

struct FileHandle {
    std::FILE* fp = nullptr;
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
};

// Quiet handlers: jump back to the caller's setjmp point instead of
// printing to stderr.
inline void png_on_error(png_structp png, png_const_charp) {
    longjmp(png_jmpbuf(png), 1);
}
inline void png_on_warning(png_structp, png_const_charp) {}

struct PngReadState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadState() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriteState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriteState() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

} // namespace detail

/// Read an 8-bit single-channel grayscale PNG. Anything else (16-bit,
/// palette, RGB, gray+alpha) is rejected as UnsupportedBitDepth.
inline GrayImage load_gray(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        raise(ErrorKind::MissingFile, path.string());

    detail::FileHandle file;
    file.fp = std::fopen(path.string().c_str(), "rb");
    if (!file.fp)
        raise(ErrorKind::IoError, "cannot open " + path.string());

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        raise(ErrorKind::DecodeError, "not a PNG file: " + path.string());

    detail::PngReadState state;
    state.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_on_error,
                                       detail::png_on_warning);
    if (!state.png)
        raise(ErrorKind::DecodeError, "png_create_read_struct failed");
    state.info = png_create_info_struct(state.png);
    if (!state.info)
        raise(ErrorKind::DecodeError, "png_create_info_struct failed");

    if (setjmp(png_jmpbuf(state.png)))
        raise(ErrorKind::DecodeError, "corrupt PNG data in " + path.string());

    png_init_io(state.png, file.fp);
    png_set_sig_bytes(state.png, 8);
    png_read_info(state.png, state.info);

    const png_uint_32 width = png_get_image_width(state.png, state.info);
    const png_uint_32 height = png_get_image_height(state.png, state.info);
    const int bit_depth = png_get_bit_depth(state.png, state.info);
    const int color_type = png_get_color_type(state.png, state.info);

    if (bit_depth != 8 || color_type != PNG_COLOR_TYPE_GRAY)
        raise(ErrorKind::UnsupportedBitDepth,
              path.string() + ": expected 8-bit grayscale, got bit depth " + std::to_string(bit_depth) +
                  ", color type " + std::to_string(color_type));

    GrayImage img(Dims{static_cast<int>(width), static_cast<int>(height)});
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = img.pixels().data() + static_cast<std::size_t>(y) * width;
    png_read_image(state.png, rows.data());
    png_read_end(state.png, nullptr);
    return img;
}

/// Write an 8-bit single-channel grayscale PNG.
inline void save_gray(const GrayImage& img, const std::filesystem::path& path) {
    if (img.empty())
        raise(ErrorKind::InvalidArgument, "cannot save empty raster to " + path.string());

    detail::FileHandle file;
    file.fp = std::fopen(path.string().c_str(), "wb");
    if (!file.fp)
        raise(ErrorKind::IoError, "cannot open for writing: " + path.string());

    detail::PngWriteState state;
    state.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_on_error,
                                        detail::png_on_warning);
    if (!state.png)
        raise(ErrorKind::IoError, "png_create_write_struct failed");
    state.info = png_create_info_struct(state.png);
    if (!state.info)
        raise(ErrorKind::IoError, "png_create_info_struct failed");

    if (setjmp(png_jmpbuf(state.png)))
        raise(ErrorKind::IoError, "PNG write failed: " + path.string());

    png_init_io(state.png, file.fp);
    // Fixed compression settings keep output byte-reproducible.
    png_set_compression_level(state.png, 6);
    png_set_IHDR(state.png, state.info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(state.png, state.info);

    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
    for (int y = 0; y < img.height(); ++y)
        rows[y] = const_cast<png_bytep>(img.pixels().data()) + static_cast<std::size_t>(y) * img.width();
    png_write_image(state.png, rows.data());
    png_write_end(state.png, nullptr);

    if (std::fflush(file.fp) != 0)
        raise(ErrorKind::IoError, "flush failed: " + path.string());
}

/// Load a binary mask: pixel value >= 128 maps to foreground.
inline BinaryMask load_mask(const std::filesystem::path& path) {
    return binarize(load_gray(path), 128);
}

/// Save a binary mask: foreground written as 255, background as 0, so that
/// save followed by load is the identity.
inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    GrayImage img(mask.dims());
    const auto& pm = mask.pixels();
    auto& pi = img.pixels();
    for (std::size_t i = 0; i < pm.size(); ++i)
        pi[i] = pm[i] ? 255 : 0;
    save_gray(img, path);
}

} // namespace drfuse
