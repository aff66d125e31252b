#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ap {

struct Rgb {
    float r = 0.f;
    float g = 0.f;
    float b = 0.f;

    bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kWhite{1.f, 1.f, 1.f};
inline constexpr Rgb kBlack{0.f, 0.f, 0.f};

/// H x W x C grid of normalized scalars, row-major, channel-interleaved.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, float fill = 0.f);
    /// Takes ownership of `data`; throws invalid-argument when the size or any value is out of range.
    RasterImage(int width, int height, int channels, std::vector<float> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_;
    }
    float at(int x, int y, int c) const noexcept { return data_[offset(x, y) + c]; }
    float& at(int x, int y, int c) noexcept { return data_[offset(x, y) + c]; }

    bool same_shape(const RasterImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    bool operator==(const RasterImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

RasterImage blank_canvas(int width, int height, Rgb background);

/// Mean of squared per-scalar differences.
double mse(const RasterImage& a, const RasterImage& b);

/// Drops alpha / replicates gray so the result always has 3 channels.
RasterImage to_rgb(const RasterImage& image);

/// Rec.601 luma, 1 channel.
RasterImage to_gray(const RasterImage& image);

}  // namespace ap
