#include "core/image.hpp"

#include <string>

#include "core/error.hpp"

namespace ap {

namespace {

void check_dims(int width, int height, int channels) {
    require(width >= 1 && height >= 1, "image dimensions must be >= 1");
    require(channels == 1 || channels == 3 || channels == 4, "channels must be 1, 3 or 4");
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    check_dims(width, height, channels);
    require(fill >= 0.f && fill <= 1.f, "fill value outside [0,1]");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    require(data_.size() == static_cast<std::size_t>(width) * height * channels,
            "data length " + std::to_string(data_.size()) + " does not match " + std::to_string(width) +
                "x" + std::to_string(height) + "x" + std::to_string(channels));
    for (float v : data_) require(v >= 0.f && v <= 1.f, "pixel value outside [0,1]");
}

RasterImage blank_canvas(int width, int height, Rgb background) {
    require(width >= 1 && height >= 1, "blank_canvas: zero dimension");
    RasterImage canvas(width, height, 3);
    auto data = canvas.data();
    for (std::size_t i = 0; i < data.size(); i += 3) {
        data[i] = background.r;
        data[i + 1] = background.g;
        data[i + 2] = background.b;
    }
    return canvas;
}

double mse(const RasterImage& a, const RasterImage& b) {
    require(a.same_shape(b), "mse: shape mismatch");
    require(!a.empty(), "mse: empty image");
    const auto da = a.data();
    const auto db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(da.size());
}

RasterImage to_rgb(const RasterImage& image) {
    if (image.channels() == 3) return image;
    RasterImage out(image.width(), image.height(), 3);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = image.channels() == 1 ? image.at(x, y, 0) : image.at(x, y, c);
            }
        }
    }
    return out;
}

RasterImage to_gray(const RasterImage& image) {
    if (image.channels() == 1) return image;
    RasterImage out(image.width(), image.height(), 1);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const double v = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
            out.at(x, y, 0) = static_cast<float>(v > 1.0 ? 1.0 : v);
        }
    }
    return out;
}

}  // namespace ap
