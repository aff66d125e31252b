#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/keyframes.hpp"

namespace ap::metrics {

/// 10*log10(1/mse); +infinity for identical images.
double psnr(const RasterImage& a, const RasterImage& b);

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// Normalized window x window Gaussian kernel, row-major.
std::vector<double> gaussian_window(int size, double sigma);

/// Mean SSIM over every fully-contained window position (no padding).
/// RGB/RGBA inputs are reduced to luma first.
double ssim(const RasterImage& a, const RasterImage& b, const SsimParams& params = {});

enum class FrameMetric { MseDist, SsimDist, Ingested };

const char* to_string(FrameMetric m) noexcept;
FrameMetric frame_metric_from_string(const std::string& name);

struct DistanceCurve {
    std::vector<double> values;
    std::string metric_name;
};

/// Per-frame distance to the target; `ingested` supplies the values for FrameMetric::Ingested.
DistanceCurve distance_curve(const KeyframeSequence& seq, const RasterImage& target, FrameMetric metric,
                             const std::vector<double>* ingested = nullptr, unsigned jobs = 1);

/// Unconstrained DTW with |a_i - b_j| local cost.
double dtw(const std::vector<double>& a, const std::vector<double>& b);

/// Linear descent 1 -> 0 over `frames` points.
std::vector<double> theoretical_curve(std::size_t frames);

struct DdcReport {
    double ddc = 0.0;
    DistanceCurve curve;        // normalized by its first value
    DistanceCurve theoretical;
};

/// Normalizes `raw` by its first element and compares against the linear curve.
DdcReport ddc_from_curve(const DistanceCurve& raw);
DdcReport ddc(const KeyframeSequence& seq, const RasterImage& target, FrameMetric metric,
              const std::vector<double>* ingested = nullptr, unsigned jobs = 1);

/// framescores/v1 document: {"schema":"framescores/v1","metric":"lpips","values":[...]}.
std::vector<double> read_frame_scores(const std::filesystem::path& path, std::string* metric = nullptr);
std::string frame_scores_to_json(const std::vector<double>& values, const std::string& metric);

std::string ddc_report_to_json(const DdcReport& report);
DdcReport ddc_report_from_json(const std::string& text);
/// frame,distance,theoretical rows.
std::string ddc_report_to_csv(const DdcReport& report);

}  // namespace ap::metrics
