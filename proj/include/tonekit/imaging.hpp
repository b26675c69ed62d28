#pragma once

#include <vector>

#include "tonekit/errors.hpp"
#include "tonekit/image.hpp"
#include "tonekit/tone.hpp"

namespace tonekit::imaging {

/// Hair-detection parameters. Defaults follow standard hair-removal practice;
/// every value is exposed through the run configuration.
struct HairParams {
    double clahe_clip_limit = 2.0;
    int clahe_tile_grid = 8;
    int blackhat_kernel = 17;   // cross-shaped structuring element, pixels
    int threshold = 10;         // on the 0-255 Black Hat response
    int dilate_radius = 1;      // pixels; 0 disables dilation
};

/// Pure-skin pixels in CIELab after hair and lesion masking.
struct SkinPixelSet {
    std::vector<tone::Lab> lab_pixels;
};

/// Hair mask via grayscale -> CLAHE -> Black Hat -> fixed threshold -> dilation.
/// An all-false mask is valid output (e.g. for constant images).
BinaryMask detect_hair_mask(const RgbImage& image, const HairParams& params = {});

/// CIELab conversion of every pixel excluded by neither mask.
/// Throws EmptySkinRegion when nothing survives.
SkinPixelSet extract_skin_pixels(const RgbImage& image, const BinaryMask& lesion,
                                 const BinaryMask& hair);

} // namespace tonekit::imaging
