#include "animatepainter/animatepainter.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <regex>
#include <string>

#include "core/error.hpp"
#include "core/image_io.hpp"
#include "dataset/dataset.hpp"
#include "dfmath/dfmath.hpp"
#include "erasure/erasure.hpp"
#include "layering/layering.hpp"
#include "metrics/metrics.hpp"
#include "sbr/planner.hpp"
#include "sbr/stroke_json.hpp"

struct ap_image_t {
    ap::RasterImage image;
};
struct ap_strokes_t {
    ap::StrokeList list;
};
struct ap_schedule_t {
    ap::erasure::EraseSchedule schedule;
};
struct ap_sequence_t {
    ap::KeyframeSequence seq;
};
struct ap_depth_t {
    ap::layering::DepthMap depth;
};
struct ap_layers_t {
    ap::layering::LayerMasks masks;
};
struct ap_ddc_report_t {
    ap::metrics::DdcReport report;
};

namespace {

namespace fs = std::filesystem;

thread_local std::string g_last_error;

ap_status status_of(ap::ErrorCode code) {
    switch (code) {
        case ap::ErrorCode::InvalidArgument: return AP_ERR_INVALID_ARGUMENT;
        case ap::ErrorCode::Io: return AP_ERR_IO;
        case ap::ErrorCode::Parse: return AP_ERR_PARSE;
        case ap::ErrorCode::Validation: return AP_ERR_VALIDATION;
        case ap::ErrorCode::Format: return AP_ERR_FORMAT;
        case ap::ErrorCode::Numerical: return AP_ERR_NUMERICAL;
        case ap::ErrorCode::Degenerate: return AP_ERR_DEGENERATE;
        case ap::ErrorCode::Input: return AP_ERR_INPUT;
        case ap::ErrorCode::DatasetEmpty: return AP_ERR_DATASET_EMPTY;
    }
    return AP_ERR_INTERNAL;
}

/// Runs `fn`, translating exceptions into a status and the thread's last error.
template <typename Fn>
ap_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return AP_OK;
    } catch (const ap::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return AP_ERR_INTERNAL;
    } catch (const fs::filesystem_error& e) {
        g_last_error = e.what();
        return AP_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return AP_ERR_INTERNAL;
    }
}

template <typename T>
void need(const T* p, const char* what) {
    if (!p) ap::fail(ap::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ap::sbr::PlannerConfig planner_from_c(const ap_planner_config* c) {
    ap::sbr::PlannerConfig cfg;
    if (!c) return cfg;
    ap::require(c->levels >= 1 && c->levels <= AP_MAX_LEVELS, "planner: levels must be in [1, 16]");
    cfg.levels = c->levels;
    cfg.strokes_per_level.assign(c->strokes_per_level, c->strokes_per_level + c->levels);
    cfg.candidates_per_cell = c->candidates_per_cell;
    cfg.seed = c->seed;
    cfg.min_improvement = c->min_improvement;
    cfg.background = ap::Rgb{c->background[0], c->background[1], c->background[2]};
    cfg.jobs = c->jobs == 0 ? 1 : c->jobs;
    return cfg;
}

ap::metrics::FrameMetric metric_from_c(ap_frame_metric m) {
    switch (m) {
        case AP_METRIC_MSE_DIST: return ap::metrics::FrameMetric::MseDist;
        case AP_METRIC_SSIM_DIST: return ap::metrics::FrameMetric::SsimDist;
        case AP_METRIC_INGESTED: return ap::metrics::FrameMetric::Ingested;
    }
    ap::fail(ap::ErrorCode::InvalidArgument, "unknown frame metric");
}

ap::layering::DepthConvention convention_from_c(ap_depth_convention c) {
    return c == AP_DEPTH_LARGER_IS_FARTHER ? ap::layering::DepthConvention::LargerIsFarther
                                           : ap::layering::DepthConvention::LargerIsNearer;
}

ap::dataset::DatasetConfig dataset_from_c(const ap_dataset_config* c) {
    ap::dataset::DatasetConfig cfg;
    need(c, "config");
    cfg.frames = c->frames;
    cfg.layers = c->layers;
    cfg.planner = planner_from_c(&c->planner);
    cfg.metric = metric_from_c(c->metric);
    cfg.seed = c->seed;
    if (c->filter_enabled) cfg.filter_threshold = c->filter_threshold;
    cfg.depth_convention = convention_from_c(c->depth_convention);
    cfg.jobs = c->jobs == 0 ? 1 : c->jobs;
    return cfg;
}

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%02zu.png", prefix, i);
    return buf;
}

}  // namespace

extern "C" {

const char* ap_version(void) { return "1.0.0"; }

const char* ap_status_string(ap_status status) {
    switch (status) {
        case AP_OK: return "ok";
        case AP_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case AP_ERR_IO: return "io-error";
        case AP_ERR_PARSE: return "parse-error";
        case AP_ERR_VALIDATION: return "validation-error";
        case AP_ERR_FORMAT: return "format-error";
        case AP_ERR_NUMERICAL: return "numerical-error";
        case AP_ERR_DEGENERATE: return "degenerate-input";
        case AP_ERR_INPUT: return "input-error";
        case AP_ERR_DATASET_EMPTY: return "dataset-empty";
        case AP_ERR_INTERNAL: return "internal-error";
    }
    return "unknown";
}

const char* ap_last_error(void) { return g_last_error.c_str(); }

void ap_string_free(char* s) { std::free(s); }

// ---- images

ap_status ap_image_blank(int width, int height, float r, float g, float b, ap_image* out) {
    return guarded([&] {
        need(out, "out");
        *out = new ap_image_t{ap::blank_canvas(width, height, ap::Rgb{r, g, b})};
    });
}

ap_status ap_image_from_data(int width, int height, int channels, const float* data, ap_image* out) {
    return guarded([&] {
        need(out, "out");
        need(data, "data");
        ap::require(width >= 1 && height >= 1, "image dimensions must be >= 1");
        const std::size_t n = static_cast<std::size_t>(width) * height * static_cast<std::size_t>(std::max(channels, 0));
        *out = new ap_image_t{ap::RasterImage(width, height, channels, std::vector<float>(data, data + n))};
    });
}

ap_status ap_image_load(const char* path, ap_image* out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new ap_image_t{ap::to_rgb(ap::io::read_image(path))};
    });
}

ap_status ap_image_save_png(ap_image image, const char* path) {
    return guarded([&] {
        need(image, "image");
        need(path, "path");
        ap::io::write_png(path, image->image);
    });
}

int ap_image_width(ap_image image) { return image ? image->image.width() : 0; }
int ap_image_height(ap_image image) { return image ? image->image.height() : 0; }
int ap_image_channels(ap_image image) { return image ? image->image.channels() : 0; }
const float* ap_image_data(ap_image image) { return image ? image->image.data().data() : nullptr; }
void ap_image_free(ap_image image) { delete image; }

ap_status ap_mse(ap_image a, ap_image b, double* out) {
    return guarded([&] {
        need(a, "a");
        need(b, "b");
        need(out, "out");
        *out = ap::mse(a->image, b->image);
    });
}

ap_status ap_psnr(ap_image a, ap_image b, double* out) {
    return guarded([&] {
        need(a, "a");
        need(b, "b");
        need(out, "out");
        *out = ap::metrics::psnr(a->image, b->image);
    });
}

ap_status ap_ssim(ap_image a, ap_image b, double* out) {
    return guarded([&] {
        need(a, "a");
        need(b, "b");
        need(out, "out");
        *out = ap::metrics::ssim(a->image, b->image);
    });
}

// ---- strokes

void ap_planner_config_default(ap_planner_config* config) {
    if (!config) return;
    const ap::sbr::PlannerConfig d;
    std::memset(config, 0, sizeof *config);
    config->levels = d.levels;
    for (int i = 0; i < d.levels; ++i) config->strokes_per_level[i] = d.budget(i);
    config->candidates_per_cell = d.candidates_per_cell;
    config->seed = d.seed;
    config->min_improvement = d.min_improvement;
    config->background[0] = d.background.r;
    config->background[1] = d.background.g;
    config->background[2] = d.background.b;
    config->jobs = 1;
}

ap_status ap_plan_strokes(ap_image target, const ap_planner_config* config, ap_strokes* out) {
    return guarded([&] {
        need(target, "target");
        need(out, "out");
        *out = new ap_strokes_t{ap::sbr::plan_strokes(target->image, planner_from_c(config))};
    });
}

ap_status ap_strokes_load(const char* path, ap_strokes* out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new ap_strokes_t{ap::sbr::import_strokes(path)};
    });
}

ap_status ap_strokes_save(ap_strokes strokes, const char* path) {
    return guarded([&] {
        need(strokes, "strokes");
        need(path, "path");
        ap::sbr::export_strokes(path, strokes->list);
    });
}

ap_status ap_strokes_to_json(ap_strokes strokes, char** out) {
    return guarded([&] {
        need(strokes, "strokes");
        need(out, "out");
        *out = dup_string(ap::sbr::strokes_to_json(strokes->list));
    });
}

size_t ap_strokes_count(ap_strokes strokes) { return strokes ? strokes->list.size() : 0; }
int ap_strokes_canvas_width(ap_strokes strokes) { return strokes ? strokes->list.canvas_width : 0; }
int ap_strokes_canvas_height(ap_strokes strokes) { return strokes ? strokes->list.canvas_height : 0; }

ap_status ap_strokes_render(ap_strokes strokes, ap_image* out) {
    return guarded([&] {
        need(strokes, "strokes");
        need(out, "out");
        *out = new ap_image_t{ap::sbr::render(strokes->list)};
    });
}

ap_status ap_strokes_density(ap_strokes strokes, size_t* scores) {
    return guarded([&] {
        need(strokes, "strokes");
        need(scores, "scores");
        const auto s = ap::erasure::density_scores(strokes->list);
        std::copy(s.begin(), s.end(), scores);
    });
}

void ap_strokes_free(ap_strokes strokes) { delete strokes; }

// ---- schedules / keyframes

ap_status ap_schedule_build(ap_strokes strokes, int steps, ap_schedule* out) {
    return guarded([&] {
        need(strokes, "strokes");
        need(out, "out");
        const ap::StrokeList& list = strokes->list;
        std::vector<std::size_t> order;
        if (!list.strokes.empty()) order = ap::erasure::erase_order(list, ap::erasure::density_scores(list));
        *out = new ap_schedule_t{ap::erasure::make_schedule(list, order, steps)};
    });
}

size_t ap_schedule_frame_count(ap_schedule schedule) {
    return schedule ? schedule->schedule.frame_stroke_counts.size() : 0;
}

size_t ap_schedule_count_at(ap_schedule schedule, size_t erase_step) {
    if (!schedule || erase_step >= schedule->schedule.frame_stroke_counts.size()) return 0;
    return schedule->schedule.frame_stroke_counts[erase_step];
}

ap_status ap_schedule_save(ap_schedule schedule, const char* path) {
    return guarded([&] {
        need(schedule, "schedule");
        need(path, "path");
        ap::io::write_text_atomic(path, ap::erasure::schedule_to_json(schedule->schedule));
    });
}

void ap_schedule_free(ap_schedule schedule) { delete schedule; }

ap_status ap_keyframes_render(ap_strokes strokes, ap_schedule schedule, ap_sequence* out) {
    return guarded([&] {
        need(strokes, "strokes");
        need(schedule, "schedule");
        need(out, "out");
        *out = new ap_sequence_t{ap::erasure::render_keyframes(strokes->list, schedule->schedule)};
    });
}

ap_status ap_sequence_load_dir(const char* dir, ap_sequence* out) {
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        if (!fs::is_directory(dir)) ap::fail(ap::ErrorCode::Io, std::string("'") + dir + "' is not a directory");
        const std::regex pattern(R"(frame_\d+\.png)");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && std::regex_match(e.path().filename().string(), pattern)) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        ap::KeyframeSequence seq;
        for (const auto& f : files) seq.frames.push_back(ap::to_rgb(ap::io::read_image(f)));
        *out = new ap_sequence_t{std::move(seq)};
    });
}

ap_status ap_sequence_save_dir(ap_sequence seq, const char* dir) {
    return guarded([&] {
        need(seq, "seq");
        need(dir, "dir");
        fs::create_directories(dir);
        for (std::size_t i = 0; i < seq->seq.size(); ++i) {
            ap::io::write_png(fs::path(dir) / numbered("frame", i), seq->seq.frames[i]);
        }
    });
}

size_t ap_sequence_size(ap_sequence seq) { return seq ? seq->seq.size() : 0; }

ap_status ap_sequence_frame(ap_sequence seq, size_t index, ap_image* out) {
    return guarded([&] {
        need(seq, "seq");
        need(out, "out");
        ap::require(index < seq->seq.size(), "frame index out of range");
        *out = new ap_image_t{seq->seq.frames[index]};
    });
}

void ap_sequence_free(ap_sequence seq) { delete seq; }

// ---- depth / layering

ap_status ap_depth_load(const char* path, ap_depth_convention convention, ap_depth* out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new ap_depth_t{ap::layering::ingest_depth(path, convention_from_c(convention))};
    });
}

ap_status ap_depth_pseudo(ap_image image, ap_depth* out) {
    return guarded([&] {
        need(image, "image");
        need(out, "out");
        *out = new ap_depth_t{ap::layering::pseudo_depth(image->image)};
    });
}

int ap_depth_width(ap_depth depth) { return depth ? depth->depth.width : 0; }
int ap_depth_height(ap_depth depth) { return depth ? depth->depth.height : 0; }
void ap_depth_free(ap_depth depth) { delete depth; }

ap_status ap_layers_build(ap_depth depth, int layers, ap_layers* out) {
    return guarded([&] {
        need(depth, "depth");
        need(out, "out");
        const auto thresholds = ap::layering::balanced_thresholds(depth->depth, layers);
        *out = new ap_layers_t{ap::layering::layer_masks(depth->depth, thresholds)};
    });
}

int ap_layers_count(ap_layers layers) { return layers ? layers->masks.layers() : 0; }

const uint8_t* ap_layers_mask(ap_layers layers, int t) {
    if (!layers || t < 0 || t >= layers->masks.layers()) return nullptr;
    return layers->masks.masks[static_cast<std::size_t>(t)].data();
}

ap_status ap_layers_save(ap_layers layers, const char* dir) {
    return guarded([&] {
        need(layers, "layers");
        need(dir, "dir");
        fs::create_directories(dir);
        const auto& m = layers->masks;
        std::vector<std::string> files;
        for (std::size_t t = 0; t < m.masks.size(); ++t) {
            files.push_back(numbered("mask", t + 1));
            ap::io::write_png_mask(fs::path(dir) / files.back(), m.width, m.height, m.masks[t]);
        }
        ap::io::write_text_atomic(fs::path(dir) / "layers.json", ap::layering::layers_to_json(m, files));
    });
}

ap_status ap_layers_save_images(ap_layers layers, ap_image image, float r, float g, float b, const char* dir) {
    return guarded([&] {
        need(layers, "layers");
        need(image, "image");
        need(dir, "dir");
        fs::create_directories(dir);
        const auto images = ap::layering::layered_images(image->image, layers->masks, ap::Rgb{r, g, b});
        for (std::size_t t = 0; t < images.size(); ++t) {
            ap::io::write_png(fs::path(dir) / numbered("layered", t + 1), images[t]);
        }
    });
}

void ap_layers_free(ap_layers layers) { delete layers; }

// ---- metrics

double ap_dtw(const double* a, size_t n, const double* b, size_t m, ap_status* status) {
    double result = std::numeric_limits<double>::quiet_NaN();
    const ap_status s = guarded([&] {
        ap::require(a != nullptr && b != nullptr, "dtw: null sequence");
        result = ap::metrics::dtw(std::vector<double>(a, a + n), std::vector<double>(b, b + m));
    });
    if (status) *status = s;
    return result;
}

ap_status ap_ddc(ap_sequence seq, ap_image target, ap_frame_metric metric, const char* scores_path, ap_ddc_report* out) {
    return guarded([&] {
        need(seq, "seq");
        need(target, "target");
        need(out, "out");
        const auto m = metric_from_c(metric);
        std::vector<double> scores;
        if (m == ap::metrics::FrameMetric::Ingested) {
            if (!scores_path) ap::fail(ap::ErrorCode::Input, "ingested metric requires a framescores/v1 file");
            scores = ap::metrics::read_frame_scores(scores_path);
        }
        *out = new ap_ddc_report_t{ap::metrics::ddc(seq->seq, target->image, m, scores_path ? &scores : nullptr)};
    });
}

double ap_ddc_value(ap_ddc_report report) { return report ? report->report.ddc : std::nan(""); }
size_t ap_ddc_length(ap_ddc_report report) { return report ? report->report.curve.values.size() : 0; }

double ap_ddc_curve_at(ap_ddc_report report, size_t i) {
    if (!report || i >= report->report.curve.values.size()) return std::nan("");
    return report->report.curve.values[i];
}

double ap_ddc_theoretical_at(ap_ddc_report report, size_t i) {
    if (!report || i >= report->report.theoretical.values.size()) return std::nan("");
    return report->report.theoretical.values[i];
}

ap_status ap_ddc_to_json(ap_ddc_report report, char** out) {
    return guarded([&] {
        need(report, "report");
        need(out, "out");
        *out = dup_string(ap::metrics::ddc_report_to_json(report->report));
    });
}

ap_status ap_ddc_to_csv(ap_ddc_report report, char** out) {
    return guarded([&] {
        need(report, "report");
        need(out, "out");
        *out = dup_string(ap::metrics::ddc_report_to_csv(report->report));
    });
}

void ap_ddc_free(ap_ddc_report report) { delete report; }

// ---- dataset

void ap_dataset_config_default(ap_dataset_config* config) {
    if (!config) return;
    std::memset(config, 0, sizeof *config);
    const ap::dataset::DatasetConfig d;
    config->frames = d.frames;
    config->layers = d.layers;
    ap_planner_config_default(&config->planner);
    config->metric = AP_METRIC_SSIM_DIST;
    config->seed = d.seed;
    config->filter_enabled = 0;
    config->filter_threshold = 0.0;
    config->depth_convention = AP_DEPTH_LARGER_IS_NEARER;
    config->jobs = 1;
}

ap_status ap_corpus_filter_count(const char* corpus_path, const ap_dataset_config* config, size_t* kept, size_t* flagged) {
    return guarded([&] {
        need(corpus_path, "corpus_path");
        const auto cfg = dataset_from_c(config);
        const auto r = ap::dataset::filter_corpus(ap::dataset::read_corpus(corpus_path), cfg.filter_threshold);
        if (kept) *kept = r.kept.size();
        if (flagged) *flagged = r.flagged;
    });
}

ap_status ap_dataset_build(const char* corpus_path, const ap_dataset_config* config, const char* out_dir,
                           ap_dataset_summary* summary) {
    return guarded([&] {
        need(corpus_path, "corpus_path");
        need(out_dir, "out_dir");
        const auto cfg = dataset_from_c(config);
        const auto corpus = ap::dataset::read_corpus(corpus_path);
        ap_dataset_summary s{};
        s.corpus_entries = corpus.size();
        for (const auto& e : corpus) s.flagged += e.similarity ? 0 : 1;
        ap::dataset::BuildStats stats;
        try {
            const auto manifest = ap::dataset::build_dataset(corpus, cfg, out_dir, &stats);
            s.videos = manifest.entries.size();
            s.failures = manifest.failures.size();
            s.filtered_out = manifest.filtered_out;
        } catch (...) {
            if (summary) *summary = s;
            throw;
        }
        s.seconds = stats.seconds;
        s.videos_per_day = stats.videos_per_day;
        if (summary) *summary = s;
    });
}

ap_status ap_dataset_verify(const char* out_dir, size_t* violations) {
    return guarded([&] {
        need(out_dir, "out_dir");
        need(violations, "violations");
        const auto problems = ap::dataset::verify_dataset(out_dir);
        *violations = problems.size();
        if (!problems.empty()) g_last_error = problems.front();
    });
}

// ---- dfcheck

ap_status ap_dfcheck(uint64_t seed, ap_dfcheck_report* out) {
    return guarded([&] {
        need(out, "out");
        const auto r = ap::df::run_dfcheck(seed);
        *out = ap_dfcheck_report{r.max_row_sum_error, r.single_key_error, r.loss_reduction_error, r.gradient_error,
                                 r.passed ? 1 : 0};
    });
}

}  // extern "C"
