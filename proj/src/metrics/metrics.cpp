#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "core/error.hpp"
#include "core/image_io.hpp"
#include "core/parallel.hpp"

namespace ap::metrics {

double psnr(const RasterImage& a, const RasterImage& b) {
    const double e = mse(a, b);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / e);
}

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(size) * size);
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = x - c, dy = y - c;
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            w[static_cast<std::size_t>(y) * size + x] = v;
            sum += v;
        }
    }
    for (double& v : w) v /= sum;
    return w;
}

namespace {

/// Separable valid-mode filter with the 1-D Gaussian.
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int ow = w - n + 1, oh = h - n + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[i] * img[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    return out;
}

std::vector<double> luma(const RasterImage& img) {
    std::vector<double> out(img.pixel_count());
    const auto d = img.data();
    const int ch = img.channels();
    for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] = ch == 1 ? d[p] : 0.299 * d[p * ch] + 0.587 * d[p * ch + 1] + 0.114 * d[p * ch + 2];
    }
    return out;
}

}  // namespace

double ssim(const RasterImage& a, const RasterImage& b, const SsimParams& params) {
    require(a.same_shape(b), "ssim: shape mismatch");
    require(a.width() >= params.window && a.height() >= params.window, "ssim: image smaller than the window");
    const int w = a.width(), h = a.height();

    std::vector<double> k1d(static_cast<std::size_t>(params.window));
    {
        const double c = (params.window - 1) / 2.0;
        double sum = 0.0;
        for (int i = 0; i < params.window; ++i) {
            k1d[i] = std::exp(-(i - c) * (i - c) / (2.0 * params.sigma * params.sigma));
            sum += k1d[i];
        }
        for (double& v : k1d) v /= sum;
    }

    const std::vector<double> x = luma(a), y = luma(b);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h, k1d), my = filter_valid(y, w, h, k1d);
    const auto sxx = filter_valid(xx, w, h, k1d), syy = filter_valid(yy, w, h, k1d), sxy = filter_valid(xy, w, h, k1d);

    const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
    const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cov = sxy[i] - mx[i] * my[i];
        total += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(mx.size());
}

const char* to_string(FrameMetric m) noexcept {
    switch (m) {
        case FrameMetric::MseDist: return "mse-dist";
        case FrameMetric::SsimDist: return "ssim-dist";
        case FrameMetric::Ingested: return "ingested";
    }
    return "unknown";
}

FrameMetric frame_metric_from_string(const std::string& name) {
    if (name == "mse-dist" || name == "mse") return FrameMetric::MseDist;
    if (name == "ssim-dist" || name == "ssim") return FrameMetric::SsimDist;
    if (name == "ingested") return FrameMetric::Ingested;
    fail(ErrorCode::InvalidArgument, "unknown frame metric '" + name + "' (expected mse-dist, ssim-dist or ingested)");
}

DistanceCurve distance_curve(const KeyframeSequence& seq, const RasterImage& target, FrameMetric metric,
                             const std::vector<double>* ingested, unsigned jobs) {
    DistanceCurve curve;
    curve.metric_name = to_string(metric);
    if (metric == FrameMetric::Ingested) {
        if (!ingested) fail(ErrorCode::Input, "distance_curve: ingested metric requires a per-frame score file");
        if (ingested->size() != seq.size()) {
            fail(ErrorCode::Input, "distance_curve: " + std::to_string(ingested->size()) + " ingested scores for " +
                                       std::to_string(seq.size()) + " frames");
        }
        for (double v : *ingested) {
            if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::Input, "distance_curve: ingested scores must be finite and >= 0");
        }
        curve.values = *ingested;
        return curve;
    }
    for (const RasterImage& f : seq.frames) require(f.same_shape(target), "distance_curve: frame shape differs from target");
    curve.values.assign(seq.size(), 0.0);
    parallel_for(seq.size(), jobs, [&](std::size_t i) {
        curve.values[i] = metric == FrameMetric::MseDist ? mse(seq.frames[i], target)
                                                         : std::max(0.0, (1.0 - ssim(seq.frames[i], target)) / 2.0);
    });
    return curve;
}

double dtw(const std::vector<double>& a, const std::vector<double>& b) {
    require(!a.empty() && !b.empty(), "dtw: sequences must be non-empty");
    const std::size_t n = a.size(), m = b.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = std::abs(a[i - 1] - b[j - 1]) + std::min({prev[j], cur[j - 1], prev[j - 1]});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::vector<double> theoretical_curve(std::size_t frames) {
    require(frames >= 2, "theoretical_curve: need at least 2 frames");
    std::vector<double> t(frames);
    for (std::size_t j = 0; j < frames; ++j) t[j] = 1.0 - static_cast<double>(j) / static_cast<double>(frames - 1);
    return t;
}

DdcReport ddc_from_curve(const DistanceCurve& raw) {
    if (raw.values.size() < 2) fail(ErrorCode::Degenerate, "ddc: need at least 2 frames");
    const double first = raw.values.front();
    if (!(first > 0.0)) fail(ErrorCode::Degenerate, "ddc: first frame already matches the target (distance 0)");
    DdcReport report;
    report.curve.metric_name = raw.metric_name;
    report.curve.values.reserve(raw.values.size());
    for (double v : raw.values) report.curve.values.push_back(v / first);
    report.theoretical.metric_name = "linear";
    report.theoretical.values = theoretical_curve(raw.values.size());
    report.ddc = dtw(report.curve.values, report.theoretical.values);
    return report;
}

DdcReport ddc(const KeyframeSequence& seq, const RasterImage& target, FrameMetric metric,
              const std::vector<double>* ingested, unsigned jobs) {
    if (seq.size() < 2) fail(ErrorCode::Degenerate, "ddc: need at least 2 frames");
    return ddc_from_curve(distance_curve(seq, target, metric, ingested, jobs));
}

std::vector<double> read_frame_scores(const std::filesystem::path& path, std::string* metric) {
    const std::string text = io::read_text(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::Parse, path.string() + ": " + e.what());
    }
    try {
        if (doc.at("schema").get<std::string>() != "framescores/v1") {
            fail(ErrorCode::Validation, path.string() + ": schema must be \"framescores/v1\"");
        }
        if (metric) *metric = doc.value("metric", std::string("unknown"));
        return doc.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Validation, path.string() + ": " + e.what());
    }
}

std::string frame_scores_to_json(const std::vector<double>& values, const std::string& metric) {
    const nlohmann::json doc = {{"schema", "framescores/v1"}, {"metric", metric}, {"values", values}};
    return doc.dump(2) + "\n";
}

std::string ddc_report_to_json(const DdcReport& report) {
    const nlohmann::json doc = {{"schema", "ddc/v1"},
                                {"ddc", report.ddc},
                                {"metric", report.curve.metric_name},
                                {"curve", report.curve.values},
                                {"theoretical", report.theoretical.values}};
    return doc.dump(2) + "\n";
}

DdcReport ddc_report_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        DdcReport r;
        r.ddc = doc.at("ddc").get<double>();
        r.curve.metric_name = doc.at("metric").get<std::string>();
        r.curve.values = doc.at("curve").get<std::vector<double>>();
        r.theoretical.metric_name = "linear";
        r.theoretical.values = doc.at("theoretical").get<std::vector<double>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("ddc report: ") + e.what());
    }
}

std::string ddc_report_to_csv(const DdcReport& report) {
    std::ostringstream ss;
    ss << std::setprecision(std::numeric_limits<double>::max_digits10);
    ss << "frame,distance,theoretical\n";
    for (std::size_t i = 0; i < report.curve.values.size(); ++i) {
        ss << i << ',' << report.curve.values[i] << ',' << report.theoretical.values[i] << '\n';
    }
    return ss.str();
}

}  // namespace ap::metrics
