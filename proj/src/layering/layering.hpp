#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/image.hpp"

namespace ap::layering {

/// Relative depth, larger = nearer.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> depth;

    std::size_t size() const noexcept { return depth.size(); }
    float at(int x, int y) const noexcept { return depth[static_cast<std::size_t>(y) * width + x]; }
};

/// Throws invalid-argument on size mismatch or non-finite values.
void validate_depth(const DepthMap& depth);

enum class DepthConvention { LargerIsNearer, LargerIsFarther };

/// Cumulative far-to-near masks. masks[t-1] is D_t; the last mask is all ones.
struct LayerMasks {
    int width = 0;
    int height = 0;
    std::vector<float> thresholds;
    /// Non-cumulative layer of each pixel, 0 = farthest.
    std::vector<int> layer_of;
    std::vector<std::vector<std::uint8_t>> masks;

    int layers() const noexcept { return static_cast<int>(masks.size()); }
    /// Pixels in layer t (0-based), non-cumulative.
    std::vector<std::size_t> layer_counts() const;
};

/// T-1 cut points at the ceil(j*N/T)-th order statistics (1-based), j = 1..T-1.
std::vector<float> balanced_thresholds(const DepthMap& depth, int layers);

/// Pixel p sits above cut j when depth(p) > thr_j, or when depth(p) == thr_j and its
/// rank in (depth, row-major position) order is >= ceil(j*N/T). Its layer is the
/// number of cuts it sits above; D_t holds every pixel with layer < t.
LayerMasks layer_masks(const DepthMap& depth, const std::vector<float>& thresholds);

/// M_t: image where D_t is set, background elsewhere.
std::vector<RasterImage> layered_images(const RasterImage& image, const LayerMasks& masks, Rgb background);

/// 16-bit grayscale PNG (value / 65535) or PFM, flipped to larger = nearer if needed.
DepthMap ingest_depth(const std::filesystem::path& path, DepthConvention convention);

/// Grayscale PFM, little-endian, rows stored bottom-up as the format requires.
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_pfm(const std::filesystem::path& path);

/// Quantizes [0,1] depth to a 16-bit grayscale PNG.
void write_depth_png(const std::filesystem::path& path, const DepthMap& depth);

/// Fallback depth: 0.7 * (vertical position, bottom = near) + 0.3 * luminance, min-max normalized.
DepthMap pseudo_depth(const RasterImage& image);

/// layers/v1 index document.
std::string layers_to_json(const LayerMasks& masks, const std::vector<std::string>& mask_files);

}  // namespace ap::layering
