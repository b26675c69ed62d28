#include "tonekit/imaging.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace tonekit {

namespace {

cv::Mat to_bgr_mat(const RgbImage& image) {
    cv::Mat rgb(image.height, image.width, CV_8UC3,
                const_cast<std::uint8_t*>(image.pixels.data()));
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    return bgr;
}

} // namespace

std::size_t BinaryMask::count_set() const {
    std::size_t n = 0;
    for (auto b : bits) {
        n += b != 0;
    }
    return n;
}

RgbImage load_rgb_image(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) {
        throw Error("cannot read image: " + path);
    }
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    RgbImage image(rgb.cols, rgb.rows);
    for (int y = 0; y < rgb.rows; ++y) {
        std::copy_n(rgb.ptr<std::uint8_t>(y), static_cast<std::size_t>(rgb.cols) * 3,
                    image.pixels.data() + static_cast<std::size_t>(y) * rgb.cols * 3);
    }
    return image;
}

void save_rgb_image(const RgbImage& image, const std::string& path) {
    if (!cv::imwrite(path, to_bgr_mat(image))) {
        throw Error("cannot write image: " + path);
    }
}

BinaryMask load_mask(const std::string& path) {
    cv::Mat gray = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (gray.empty()) {
        throw Error("cannot read mask: " + path);
    }
    BinaryMask mask(gray.cols, gray.rows);
    for (int y = 0; y < gray.rows; ++y) {
        const auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < gray.cols; ++x) {
            mask.bits[static_cast<std::size_t>(y) * gray.cols + x] = row[x] != 0;
        }
    }
    return mask;
}

void save_mask(const BinaryMask& mask, const std::string& path) {
    cv::Mat gray(mask.height, mask.width, CV_8UC1);
    for (int y = 0; y < mask.height; ++y) {
        auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width; ++x) {
            row[x] = mask.get(x, y) ? 255 : 0;
        }
    }
    if (!cv::imwrite(path, gray)) {
        throw Error("cannot write mask: " + path);
    }
}

namespace imaging {

BinaryMask detect_hair_mask(const RgbImage& image, const HairParams& params) {
    cv::Mat gray;
    cv::cvtColor(to_bgr_mat(image), gray, cv::COLOR_BGR2GRAY);

    auto clahe = cv::createCLAHE(params.clahe_clip_limit,
                                 cv::Size(params.clahe_tile_grid, params.clahe_tile_grid));
    cv::Mat equalized;
    clahe->apply(gray, equalized);

    cv::Mat kernel = cv::getStructuringElement(
        cv::MORPH_CROSS, cv::Size(params.blackhat_kernel, params.blackhat_kernel));
    cv::Mat blackhat;
    cv::morphologyEx(equalized, blackhat, cv::MORPH_BLACKHAT, kernel);

    cv::Mat binary;
    cv::threshold(blackhat, binary, params.threshold, 255, cv::THRESH_BINARY);

    if (params.dilate_radius > 0) {
        int d = 2 * params.dilate_radius + 1;
        cv::Mat dilate_kernel = cv::getStructuringElement(cv::MORPH_RECT, cv::Size(d, d));
        cv::dilate(binary, binary, dilate_kernel);
    }

    BinaryMask mask(image.width, image.height);
    for (int y = 0; y < binary.rows; ++y) {
        const auto* row = binary.ptr<std::uint8_t>(y);
        for (int x = 0; x < binary.cols; ++x) {
            mask.bits[static_cast<std::size_t>(y) * binary.cols + x] = row[x] != 0;
        }
    }
    return mask;
}

SkinPixelSet extract_skin_pixels(const RgbImage& image, const BinaryMask& lesion,
                                 const BinaryMask& hair) {
    if (lesion.width != image.width || lesion.height != image.height ||
        hair.width != image.width || hair.height != image.height) {
        throw ShapeMismatch("mask dimensions must match the image");
    }
    SkinPixelSet skin;
    const std::size_t n = image.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        if (lesion.bits[i] == 0 && hair.bits[i] == 0) {
            const std::uint8_t* p = image.pixels.data() + i * 3;
            skin.lab_pixels.push_back(tone::rgb_to_lab(p[0], p[1], p[2]));
        }
    }
    if (skin.lab_pixels.empty()) {
        throw EmptySkinRegion();
    }
    return skin;
}

} // namespace imaging
} // namespace tonekit
