#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tonekit {

/// 8-bit RGB image, row-major, tightly packed.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // 3 bytes per pixel, RGB order

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto* p = at(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

/// Per-pixel boolean mask; true means the pixel is excluded.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits; // 0 or 1 per pixel

    BinaryMask() = default;
    BinaryMask(int w, int h, bool value = false)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

    std::size_t count_set() const;
};

// PNG/JPEG I/O, backed by OpenCV. Masks are single-channel images; nonzero = excluded.
RgbImage load_rgb_image(const std::string& path);
void save_rgb_image(const RgbImage& image, const std::string& path);
BinaryMask load_mask(const std::string& path);
void save_mask(const BinaryMask& mask, const std::string& path);

} // namespace tonekit
