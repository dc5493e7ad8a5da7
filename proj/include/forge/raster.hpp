#pragma once

#include "forge/error.hpp"

#include <png.h>

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace forge {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;

    friend constexpr bool operator==(Rgb, Rgb) noexcept = default;
};

inline constexpr Rgb white{255, 255, 255};
inline constexpr Rgb black{0, 0, 0};

/// Row-major 8-bit RGB image.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(std::size_t width, std::size_t height, Rgb fill = white)
        : width_(width), height_(height), pixels_(3 * width * height) {
        for (std::size_t i = 0; i < width * height; ++i) {
            pixels_[3 * i] = fill.r;
            pixels_[3 * i + 1] = fill.g;
            pixels_[3 * i + 2] = fill.b;
        }
    }

    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] bool empty() const noexcept { return width_ == 0 || height_ == 0; }
    [[nodiscard]] std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

    [[nodiscard]] Rgb at(std::size_t x, std::size_t y) const noexcept {
        const std::size_t i = 3 * (y * width_ + x);
        return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
    }

    void set(std::size_t x, std::size_t y, Rgb c) noexcept {
        const std::size_t i = 3 * (y * width_ + x);
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Side-by-side composition (left | right), used for front/back pairs.
inline RasterImage hconcat(const RasterImage& left, const RasterImage& right) {
    const std::size_t h = std::max(left.height(), right.height());
    RasterImage out(left.width() + right.width(), h);
    for (std::size_t y = 0; y < left.height(); ++y)
        for (std::size_t x = 0; x < left.width(); ++x) out.set(x, y, left.at(x, y));
    for (std::size_t y = 0; y < right.height(); ++y)
        for (std::size_t x = 0; x < right.width(); ++x) out.set(left.width() + x, y, right.at(x, y));
    return out;
}

enum class PngErrc { Encode, Decode };
using PngError = CodedError<PngErrc>;

namespace detail {

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

inline void png_flush_noop(png_structp) {}

struct PngReader {
    std::span<const std::uint8_t> data;
    std::size_t offset = 0;
};

inline void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
    auto* src = static_cast<PngReader*>(png_get_io_ptr(png));
    if (src->offset + length > src->data.size()) png_error(png, "truncated PNG");
    std::memcpy(out, src->data.data() + src->offset, length);
    src->offset += length;
}

} // namespace detail

/// 8-bit RGB PNG without alpha or ancillary chunks, so bytes depend only on pixels.
inline std::vector<std::uint8_t> encode_png(const RasterImage& img) {
    if (img.empty()) throw PngError(PngErrc::Encode, "empty image");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw PngError(PngErrc::Encode, "libpng initialisation failed");
    }
    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(img.height());
    auto* base = const_cast<std::uint8_t*>(img.bytes().data());
    for (std::size_t y = 0; y < img.height(); ++y) rows[y] = base + 3 * img.width() * y;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw PngError(PngErrc::Encode, "libpng write failed");
    }
    png_set_write_fn(png, &out, detail::png_write_to_vector, detail::png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

/// Decodes any PNG into 8-bit RGB (alpha is composited over white).
inline RasterImage decode_png(std::span<const std::uint8_t> data) {
    if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) throw PngError(PngErrc::Decode, "not a PNG");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw PngError(PngErrc::Decode, "libpng initialisation failed");
    }
    detail::PngReader reader{data, 0};
    RasterImage img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw PngError(PngErrc::Decode, "corrupt PNG");
    }
    png_set_read_fn(png, &reader, detail::png_read_from_span);
    png_read_png(png, info, PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_PACKING | PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_GRAY_TO_RGB,
                 nullptr);
    const std::size_t w = png_get_image_width(png, info);
    const std::size_t h = png_get_image_height(png, info);
    const int channels = png_get_channels(png, info);
    png_bytepp rows = png_get_rows(png, info);
    img = RasterImage(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const png_bytep px = rows[y] + static_cast<std::size_t>(channels) * x;
            if (channels == 4) {
                const unsigned a = px[3];
                const auto over = [a](unsigned c) { return static_cast<std::uint8_t>((c * a + 255U * (255U - a) + 127U) / 255U); };
                img.set(x, y, {over(px[0]), over(px[1]), over(px[2])});
            } else {
                img.set(x, y, {px[0], px[1], px[2]});
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

} // namespace forge
