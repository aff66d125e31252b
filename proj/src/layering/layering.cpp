#include "layering/layering.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "core/image_io.hpp"

namespace ap::layering {

void validate_depth(const DepthMap& depth) {
    require(depth.width >= 1 && depth.height >= 1, "depth map is empty");
    require(depth.depth.size() == static_cast<std::size_t>(depth.width) * depth.height, "depth map size mismatch");
    for (float v : depth.depth) require(std::isfinite(v), "depth map contains non-finite values");
}

std::vector<std::size_t> LayerMasks::layer_counts() const {
    std::vector<std::size_t> counts(masks.size(), 0);
    for (int l : layer_of) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

/// Pixel indices sorted by (depth, position).
std::vector<std::size_t> depth_order(const DepthMap& depth) {
    std::vector<std::size_t> order(depth.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return depth.depth[a] < depth.depth[b]; });
    return order;
}

}  // namespace

std::vector<float> balanced_thresholds(const DepthMap& depth, int layers) {
    require(layers >= 1, "balanced_thresholds: layer count must be >= 1");
    validate_depth(depth);
    std::vector<float> sorted = depth.depth;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::size_t t = static_cast<std::size_t>(layers);
    std::vector<float> thresholds;
    thresholds.reserve(t - 1);
    for (std::size_t j = 1; j < t; ++j) {
        const std::size_t k = ceil_div(j * n, t);  // 1-based order statistic
        thresholds.push_back(sorted[k == 0 ? 0 : k - 1]);
    }
    return thresholds;
}

LayerMasks layer_masks(const DepthMap& depth, const std::vector<float>& thresholds) {
    validate_depth(depth);
    require(std::is_sorted(thresholds.begin(), thresholds.end()), "layer_masks: thresholds must be ascending");
    const std::size_t n = depth.size();
    const std::size_t t = thresholds.size() + 1;

    std::vector<std::size_t> rank(n);
    {
        const std::vector<std::size_t> order = depth_order(depth);
        for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
    }

    LayerMasks out;
    out.width = depth.width;
    out.height = depth.height;
    out.thresholds = thresholds;
    out.layer_of.assign(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        const float d = depth.depth[p];
        int layer = 0;
        for (std::size_t j = 1; j < t; ++j) {
            const float thr = thresholds[j - 1];
            if (d > thr || (d == thr && rank[p] >= ceil_div(j * n, t))) ++layer;
        }
        out.layer_of[p] = layer;
    }
    out.masks.assign(t, std::vector<std::uint8_t>(n, 0));
    for (std::size_t m = 0; m < t; ++m) {
        for (std::size_t p = 0; p < n; ++p) out.masks[m][p] = out.layer_of[p] <= static_cast<int>(m) ? 1 : 0;
    }
    return out;
}

std::vector<RasterImage> layered_images(const RasterImage& image, const LayerMasks& masks, Rgb background) {
    require(image.width() == masks.width && image.height() == masks.height,
            "layered_images: image and masks differ in size");
    const RasterImage rgb = to_rgb(image);
    const float bg[3] = {background.r, background.g, background.b};
    std::vector<RasterImage> out;
    out.reserve(masks.masks.size());
    for (const auto& mask : masks.masks) {
        RasterImage m = rgb;
        auto data = m.data();
        for (std::size_t p = 0; p < mask.size(); ++p) {
            if (mask[p]) continue;
            for (int c = 0; c < 3; ++c) data[p * 3 + c] = bg[c];
        }
        out.push_back(std::move(m));
    }
    return out;
}

namespace {

bool has_suffix(const std::filesystem::path& path, const char* ext) {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

bool is_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[2] = {};
    in.read(magic, 2);
    return in && magic[0] == 'P' && (magic[1] == 'f' || magic[1] == 'F');
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const DepthMap& depth) {
    validate_depth(depth);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out << "Pf\n" << depth.width << " " << depth.height << "\n-1.0\n";
    for (int y = depth.height - 1; y >= 0; --y) {
        for (int x = 0; x < depth.width; ++x) {
            const float v = depth.at(x, y);
            unsigned char bytes[4];
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            for (int b = 0; b < 4; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
            out.write(reinterpret_cast<const char*>(bytes), 4);
        }
    }
    if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

DepthMap read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if (!in || in.get() == EOF) fail(ErrorCode::Format, "'" + path.string() + "': truncated PFM header");
    if (magic == "PF") fail(ErrorCode::Format, "'" + path.string() + "': color PFM not supported for depth");
    if (magic != "Pf" || w < 1 || h < 1 || scale == 0.0) fail(ErrorCode::Format, "'" + path.string() + "': bad PFM header");
    const bool little = scale < 0.0;
    DepthMap d{w, h, std::vector<float>(static_cast<std::size_t>(w) * h)};
    for (int y = h - 1; y >= 0; --y) {
        for (int x = 0; x < w; ++x) {
            unsigned char bytes[4];
            if (!in.read(reinterpret_cast<char*>(bytes), 4)) fail(ErrorCode::Format, "'" + path.string() + "': truncated PFM data");
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[little ? b : 3 - b]) << (8 * b);
            float v;
            std::memcpy(&v, &bits, 4);
            d.depth[static_cast<std::size_t>(y) * w + x] = v;
        }
    }
    return d;
}

void write_depth_png(const std::filesystem::path& path, const DepthMap& depth) {
    validate_depth(depth);
    io::Gray16 g{depth.width, depth.height, std::vector<std::uint16_t>(depth.size())};
    for (std::size_t i = 0; i < depth.size(); ++i) {
        const float v = std::clamp(depth.depth[i], 0.f, 1.f);
        g.samples[i] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    }
    io::write_png_gray16(path, g);
}

DepthMap ingest_depth(const std::filesystem::path& path, DepthConvention convention) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::Io, "depth file '" + path.string() + "' does not exist");
    DepthMap d;
    if (is_pfm(path) || has_suffix(path, ".pfm")) {
        d = read_pfm(path);
        validate_depth(d);
        const auto [lo, hi] = std::minmax_element(d.depth.begin(), d.depth.end());
        if (*lo < 0.f || *hi > 1.f) {
            const float low = *lo;
            const float range = *hi - *lo;
            for (float& v : d.depth) v = range > 0.f ? (v - low) / range : 0.f;
        }
    } else {
        const io::Gray16 g = io::read_png_gray16(path);
        d.width = g.width;
        d.height = g.height;
        d.depth.resize(g.samples.size());
        for (std::size_t i = 0; i < g.samples.size(); ++i) d.depth[i] = static_cast<float>(g.samples[i] / 65535.0);
    }
    if (convention == DepthConvention::LargerIsFarther) {
        for (float& v : d.depth) v = 1.f - v;
    }
    return d;
}

DepthMap pseudo_depth(const RasterImage& image) {
    const RasterImage gray = to_gray(image);
    const int w = gray.width();
    const int h = gray.height();
    std::vector<double> raw(gray.pixel_count());
    for (int y = 0; y < h; ++y) {
        const double nearness = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
        for (int x = 0; x < w; ++x) raw[static_cast<std::size_t>(y) * w + x] = 0.7 * nearness + 0.3 * gray.at(x, y, 0);
    }
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double low = *lo;
    const double range = *hi - *lo;
    DepthMap d{w, h, std::vector<float>(raw.size())};
    for (std::size_t i = 0; i < raw.size(); ++i) d.depth[i] = range > 0.0 ? static_cast<float>((raw[i] - low) / range) : 0.f;
    return d;
}

std::string layers_to_json(const LayerMasks& masks, const std::vector<std::string>& mask_files) {
    const nlohmann::json doc = {{"schema", "layers/v1"},
                                {"width", masks.width},
                                {"height", masks.height},
                                {"layers", masks.layers()},
                                {"thresholds", masks.thresholds},
                                {"counts", masks.layer_counts()},
                                {"masks", mask_files}};
    return doc.dump(2) + "\n";
}

}  // namespace ap::layering
