// animatepainter command-line front end. Links only the public C API.
//
// Exit codes: 0 ok, 1 internal, 2 input/usage, 3 schema, 4 empty result, 5 metric.

#include <animatepainter/animatepainter.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kInput = 2, kSchema = 3, kEmpty = 4, kMetric = 5 };

int exit_for(ap_status s) {
    switch (s) {
        case AP_OK: return kOk;
        case AP_ERR_INVALID_ARGUMENT:
        case AP_ERR_IO: return kInput;
        case AP_ERR_PARSE:
        case AP_ERR_VALIDATION:
        case AP_ERR_FORMAT: return kSchema;
        case AP_ERR_DATASET_EMPTY: return kEmpty;
        case AP_ERR_NUMERICAL:
        case AP_ERR_DEGENERATE:
        case AP_ERR_INPUT: return kMetric;
        case AP_ERR_INTERNAL: return kInternal;
    }
    return kInternal;
}

struct Failure {
    int code;
    std::string message;
};

void check(ap_status s, const std::string& context) {
    if (s != AP_OK) throw Failure{exit_for(s), context + ": " + ap_last_error()};
}

template <typename T, void (*Free)(T)>
struct Handle {
    T h = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() {
        if (h) Free(h);
    }
    T* out() { return &h; }
    operator T() const { return h; }
};

using Image = Handle<ap_image, ap_image_free>;
using Strokes = Handle<ap_strokes, ap_strokes_free>;
using Schedule = Handle<ap_schedule, ap_schedule_free>;
using Sequence = Handle<ap_sequence, ap_sequence_free>;
using Depth = Handle<ap_depth, ap_depth_free>;
using Layers = Handle<ap_layers, ap_layers_free>;
using Report = Handle<ap_ddc_report, ap_ddc_free>;

struct CString {
    char* s = nullptr;
    ~CString() { ap_string_free(s); }
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Failure{kInput, "cannot write '" + path.string() + "'"};
}

// ---- options shared across subcommands

struct PlannerFlags {
    int levels = 4;
    std::vector<int> budgets{32, 64, 128, 256};
    int candidates = 8;
    double min_improvement = 1e-7;
};

struct Options {
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    PlannerFlags planner;

    std::string in, out, strokes, depth, corpus, frames_dir, target, scores;
    int frames = 12;
    int layers = 0;
    std::string depth_convention = "nearer";
    std::string metric = "ssim-dist";
    std::optional<double> filter;
};

/// Values from a --config JSON file; flags given on the command line win.
json load_config(int argc, char** argv) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    }
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw Failure{kInput, "cannot open config '" + path + "'"};
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Failure{kSchema, path + ": " + e.what()};
    }
    if (!doc.is_object()) throw Failure{kSchema, path + ": config must be a JSON object"};
    static const std::set<std::string> known{"seed",   "jobs",   "levels",  "strokes-per-level", "candidates",
                                             "min-improvement",  "frames",  "layers",  "depth-convention",
                                             "metric", "filter"};
    for (const auto& [k, v] : doc.items()) {
        if (!known.count(k)) throw Failure{kSchema, path + ": unknown config key '" + k + "'"};
    }
    return doc;
}

void apply_config(const json& cfg, Options& o) {
    try {
        if (cfg.contains("seed")) o.seed = cfg["seed"].get<std::uint64_t>();
        if (cfg.contains("jobs")) o.jobs = cfg["jobs"].get<unsigned>();
        if (cfg.contains("levels")) o.planner.levels = cfg["levels"].get<int>();
        if (cfg.contains("strokes-per-level")) o.planner.budgets = cfg["strokes-per-level"].get<std::vector<int>>();
        if (cfg.contains("candidates")) o.planner.candidates = cfg["candidates"].get<int>();
        if (cfg.contains("min-improvement")) o.planner.min_improvement = cfg["min-improvement"].get<double>();
        if (cfg.contains("frames")) o.frames = cfg["frames"].get<int>();
        if (cfg.contains("layers")) o.layers = cfg["layers"].get<int>();
        if (cfg.contains("depth-convention")) o.depth_convention = cfg["depth-convention"].get<std::string>();
        if (cfg.contains("metric")) o.metric = cfg["metric"].get<std::string>();
        if (cfg.contains("filter")) o.filter = cfg["filter"].get<double>();
    } catch (const json::exception& e) {
        throw Failure{kSchema, std::string("config: ") + e.what()};
    }
}

unsigned resolve_jobs(const CLI::Option* flag, unsigned value) {
    if (flag->count() > 0) return std::max(1u, value);
    if (const char* env = std::getenv("ANIMATEPAINTER_JOBS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        throw Failure{kInput, std::string("ANIMATEPAINTER_JOBS must be a positive integer, got '") + env + "'"};
    }
    if (value > 0) return value;
    return std::max(1u, std::thread::hardware_concurrency());
}

ap_planner_config planner_config(const Options& o, unsigned jobs) {
    ap_planner_config c;
    ap_planner_config_default(&c);
    const auto& p = o.planner;
    if (p.levels < 1 || p.levels > AP_MAX_LEVELS) throw Failure{kInput, "--levels must be in [1, 16]"};
    if (p.budgets.size() != 1 && p.budgets.size() != static_cast<std::size_t>(p.levels)) {
        throw Failure{kInput, "--strokes-per-level needs 1 or --levels values"};
    }
    c.levels = p.levels;
    for (int i = 0; i < p.levels; ++i) c.strokes_per_level[i] = p.budgets.size() == 1 ? p.budgets[0] : p.budgets[i];
    c.candidates_per_cell = p.candidates;
    c.min_improvement = p.min_improvement;
    c.seed = o.seed;
    c.jobs = jobs;
    return c;
}

ap_frame_metric metric_of(const std::string& name) {
    if (name == "mse-dist") return AP_METRIC_MSE_DIST;
    if (name == "ssim-dist") return AP_METRIC_SSIM_DIST;
    if (name == "ingested") return AP_METRIC_INGESTED;
    throw Failure{kInput, "unknown metric '" + name + "' (expected mse-dist, ssim-dist or ingested)"};
}

ap_depth_convention convention_of(const std::string& name) {
    if (name == "nearer") return AP_DEPTH_LARGER_IS_NEARER;
    if (name == "farther") return AP_DEPTH_LARGER_IS_FARTHER;
    throw Failure{kInput, "unknown depth convention '" + name + "' (expected nearer or farther)"};
}

void add_planner_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--levels", o.planner.levels, "coarse-to-fine levels")->capture_default_str();
    cmd->add_option("--strokes-per-level", o.planner.budgets, "stroke budget per level (one value broadcasts)")
        ->capture_default_str();
    cmd->add_option("--candidates", o.planner.candidates, "candidates sampled per grid cell")->capture_default_str();
    cmd->add_option("--min-improvement", o.planner.min_improvement, "minimum mse drop to accept a stroke")
        ->capture_default_str();
}

// ---- subcommands

void plan_from_image(const Options& o, unsigned jobs, Image& target, Strokes& strokes) {
    check(ap_image_load(o.in.c_str(), target.out()), o.in);
    const ap_planner_config cfg = planner_config(o, jobs);
    check(ap_plan_strokes(target, &cfg, strokes.out()), "render");
}

int cmd_render(const Options& o, unsigned jobs) {
    Image target;
    Strokes strokes;
    plan_from_image(o, jobs, target, strokes);
    fs::create_directories(o.out);
    check(ap_strokes_save(strokes, (fs::path(o.out) / "strokes.json").c_str()), "strokes.json");
    Image rendered;
    check(ap_strokes_render(strokes, rendered.out()), "render");
    check(ap_image_save_png(rendered, (fs::path(o.out) / "render.png").c_str()), "render.png");
    double err = 0.0;
    check(ap_mse(rendered, target, &err), "mse");
    std::printf("strokes: %zu\nfinal mse: %.9g\n", ap_strokes_count(strokes), err);
    return kOk;
}

int cmd_process(const Options& o, unsigned jobs) {
    if (o.strokes.empty() == o.in.empty()) throw Failure{kInput, "process: give exactly one of --strokes or --in"};
    Image target;
    Strokes strokes;
    fs::create_directories(o.out);
    if (!o.in.empty()) {
        plan_from_image(o, jobs, target, strokes);
        check(ap_strokes_save(strokes, (fs::path(o.out) / "strokes.json").c_str()), "strokes.json");
    } else {
        check(ap_strokes_load(o.strokes.c_str(), strokes.out()), o.strokes);
        check(ap_strokes_render(strokes, target.out()), "render");
    }

    Schedule schedule;
    check(ap_schedule_build(strokes, o.frames - 1, schedule.out()), "schedule");
    check(ap_schedule_save(schedule, (fs::path(o.out) / "schedule.json").c_str()), "schedule.json");
    Sequence seq;
    check(ap_keyframes_render(strokes, schedule, seq.out()), "keyframes");
    check(ap_sequence_save_dir(seq, o.out.c_str()), "frames");

    Depth depth;
    if (!o.depth.empty()) {
        check(ap_depth_load(o.depth.c_str(), convention_of(o.depth_convention), depth.out()), o.depth);
    } else {
        check(ap_depth_pseudo(target, depth.out()), "pseudo depth");
    }
    const int layers = o.layers > 0 ? o.layers : o.frames - 2;
    if (layers < 1) throw Failure{kInput, "process: --layers must be >= 1"};
    Layers masks;
    check(ap_layers_build(depth, layers, masks.out()), "layers");
    check(ap_layers_save(masks, o.out.c_str()), "masks");
    check(ap_layers_save_images(masks, target, 1.0f, 1.0f, 1.0f, o.out.c_str()), "layered images");

    std::printf("frames: %zu\nstrokes: %zu\nlayers: %d\n", ap_sequence_size(seq), ap_strokes_count(strokes),
                ap_layers_count(masks));
    return kOk;
}

int cmd_dataset(const Options& o, unsigned jobs) {
    ap_dataset_config cfg;
    ap_dataset_config_default(&cfg);
    cfg.frames = o.frames;
    cfg.layers = o.layers;
    cfg.planner = planner_config(o, 1);
    cfg.metric = metric_of(o.metric);
    cfg.seed = o.seed;
    cfg.filter_enabled = o.filter.has_value();
    cfg.filter_threshold = o.filter.value_or(0.0);
    cfg.depth_convention = convention_of(o.depth_convention);
    cfg.jobs = jobs;

    ap_dataset_summary s{};
    const ap_status st = ap_dataset_build(o.corpus.c_str(), &cfg, o.out.c_str(), &s);
    std::printf("corpus: %zu\nfiltered out: %zu\nunscored (kept, flagged): %zu\nvideos: %zu\nfailures: %zu\n",
                s.corpus_entries, s.filtered_out, s.flagged, s.videos, s.failures);
    check(st, "dataset");
    std::printf("seconds: %.3f\nvideos/day: %.0f\n", s.seconds, s.videos_per_day);
    return kOk;
}

int cmd_eval(const Options& o) {
    Sequence seq;
    check(ap_sequence_load_dir(o.frames_dir.c_str(), seq.out()), o.frames_dir);
    const std::size_t n = ap_sequence_size(seq);
    if (n < 2) throw Failure{kMetric, "eval: need at least 2 frames in '" + o.frames_dir + "', found " + std::to_string(n)};
    Image target;
    check(ap_image_load(o.target.c_str(), target.out()), o.target);

    Image last;
    check(ap_sequence_frame(seq, n - 1, last.out()), "final frame");
    double err = 0.0, psnr = 0.0, ssim = 0.0;
    check(ap_mse(last, target, &err), "mse");
    check(ap_psnr(last, target, &psnr), "psnr");
    check(ap_ssim(last, target, &ssim), "ssim");

    const ap_frame_metric metric = metric_of(o.metric);
    if (metric == AP_METRIC_INGESTED && o.scores.empty()) throw Failure{kInput, "eval: --metric ingested needs --scores"};
    Report report;
    check(ap_ddc(seq, target, metric, o.scores.empty() ? nullptr : o.scores.c_str(), report.out()), "ddc");
    CString js;
    check(ap_ddc_to_json(report, &js.s), "ddc json");

    std::printf("frames: %zu\nfinal ssim: %.9g\nfinal psnr: %.9g\nfinal mse: %.9g\n", n, ssim, psnr, err);
    std::fputs(js.s, stdout);
    if (!o.out.empty()) {
        if (fs::path(o.out).extension() == ".csv") {
            CString csv;
            check(ap_ddc_to_csv(report, &csv.s), "ddc csv");
            write_file(o.out, csv.s);
        } else {
            write_file(o.out, js.s);
        }
    }
    return kOk;
}

int cmd_dfcheck(const Options& o) {
    ap_dfcheck_report r{};
    check(ap_dfcheck(o.seed, &r), "dfcheck");
    std::printf("attention row-sum error: %.3g\nsingle-key error: %.3g\nloss reduction error: %.3g\n"
                "max relative gradient error: %.3g\n%s\n",
                r.max_row_sum_error, r.single_key_error, r.loss_reduction_error, r.gradient_error,
                r.passed ? "PASS" : "FAIL");
    return r.passed ? kOk : kMetric;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    try {
        apply_config(load_config(argc, argv), o);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    }

    CLI::App app{"animatepainter: painting-process dataset generator and evaluator"};
    app.set_version_flag("--version", std::string(ap_version()));
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; command-line flags override it");
    auto* jobs_opt = app.add_option("--jobs", o.jobs, "worker threads (default: ANIMATEPAINTER_JOBS or CPU count)");
    app.add_option("--seed", o.seed, "64-bit seed")->capture_default_str();

    auto* render = app.add_subcommand("render", "fit strokes to an image");
    render->add_option("--in", o.in, "input PNG or JPEG")->required();
    render->add_option("--out", o.out, "output directory")->required();
    add_planner_flags(render, o);

    auto* process = app.add_subcommand("process", "keyframes, schedule, masks and layered images");
    process->add_option("--strokes", o.strokes, "strokes/v1 file");
    process->add_option("--in", o.in, "image to plan strokes for");
    process->add_option("--out", o.out, "output directory")->required();
    process->add_option("--frames", o.frames, "keyframes including the blank canvas")
        ->check(CLI::Range(2, 100000))
        ->capture_default_str();
    process->add_option("--layers", o.layers, "depth layers (default frames - 2)")->check(CLI::Range(1, 100000));
    process->add_option("--depth", o.depth, "16-bit PNG or PFM depth map (default: pseudo depth)");
    process->add_option("--depth-convention", o.depth_convention, "nearer | farther")
        ->check(CLI::IsMember({"nearer", "farther"}))
        ->capture_default_str();
    add_planner_flags(process, o);

    auto* dataset = app.add_subcommand("dataset", "build a dataset from a JSON-lines corpus");
    dataset->add_option("--corpus", o.corpus, "corpus.jsonl")->required();
    dataset->add_option("--out", o.out, "output directory")->required();
    dataset->add_option("--filter", o.filter, "drop entries with similarity below this value");
    dataset->add_option("--frames", o.frames, "keyframes per video")->check(CLI::Range(2, 100000))->capture_default_str();
    dataset->add_option("--layers", o.layers, "depth layers (default frames - 2)")->check(CLI::Range(1, 100000));
    dataset->add_option("--metric", o.metric, "mse-dist | ssim-dist")
        ->check(CLI::IsMember({"mse-dist", "ssim-dist"}))
        ->capture_default_str();
    dataset->add_option("--depth-convention", o.depth_convention, "nearer | farther")
        ->check(CLI::IsMember({"nearer", "farther"}))
        ->capture_default_str();
    add_planner_flags(dataset, o);

    auto* eval = app.add_subcommand("eval", "score a keyframe sequence against its target");
    eval->add_option("--frames", o.frames_dir, "directory of frame_NN.png files")->required();
    eval->add_option("--target", o.target, "target image")->required();
    eval->add_option("--metric", o.metric, "mse-dist | ssim-dist | ingested")
        ->check(CLI::IsMember({"mse-dist", "ssim-dist", "ingested"}))
        ->capture_default_str();
    eval->add_option("--scores", o.scores, "framescores/v1 file for --metric ingested");
    eval->add_option("--out", o.out, "write the DDC report (.json or .csv)");

    auto* dfcheck = app.add_subcommand("dfcheck", "verify the depth-fusion attention and loss math");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }

    try {
        const unsigned jobs = resolve_jobs(jobs_opt, o.jobs);
        if (render->parsed()) return cmd_render(o, jobs);
        if (process->parsed()) return cmd_process(o, jobs);
        if (dataset->parsed()) return cmd_dataset(o, jobs);
        if (eval->parsed()) return cmd_eval(o);
        if (dfcheck->parsed()) return cmd_dfcheck(o);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}
