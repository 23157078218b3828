#pragma once

#include <png.h>

#include <cstring>
#include <vector>

#include "thc/core.hpp"

namespace thc {

/// Lossless PNG encode of an RGB frame (libpng simplified API).
inline std::vector<uint8_t> png_encode_rgb(const Frame& frame) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(frame.width);
    image.height = static_cast<png_uint_32>(frame.height);
    image.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, frame.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw StreamError("pivot encode error");
    }
    std::vector<uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, frame.pixels.data(), 0,
                                   nullptr)) {
        png_image_free(&image);
        throw StreamError("pivot encode error");
    }
    out.resize(size);
    return out;
}

/// Decode any 8-bit PNG to RGB (gray/palette/alpha converted by libpng).
inline Frame png_decode_rgb(const uint8_t* data, size_t size, uint32_t index = 0) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data, size))
        throw StreamError("png decode error");
    image.format = PNG_FORMAT_RGB;
    Frame frame(static_cast<int>(image.width), static_cast<int>(image.height), index);
    if (!png_image_finish_read(&image, nullptr, frame.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw StreamError("png decode error");
    }
    return frame;
}

inline Frame png_decode_rgb(const std::vector<uint8_t>& data, uint32_t index = 0) {
    return png_decode_rgb(data.data(), data.size(), index);
}

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;
};

inline std::vector<uint8_t> png_encode_gray(const GrayImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw StreamError("png encode error");
    }
    std::vector<uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw StreamError("png encode error");
    }
    out.resize(size);
    return out;
}

inline GrayImage png_decode_gray(const uint8_t* data, size_t size) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data, size))
        throw StreamError("png decode error");
    image.format = PNG_FORMAT_GRAY;
    GrayImage img;
    img.width = static_cast<int>(image.width);
    img.height = static_cast<int>(image.height);
    img.pixels.resize(static_cast<size_t>(img.width) * img.height);
    if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw StreamError("png decode error");
    }
    return img;
}

}  // namespace thc
