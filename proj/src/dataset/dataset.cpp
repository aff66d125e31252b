#include "dataset/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/image_io.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "erasure/erasure.hpp"
#include "sbr/stroke_json.hpp"

namespace ap::dataset {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%02zu.png", prefix, i);
    return buf;
}

void check_id(const std::string& id) {
    if (id.empty() || id == "." || id == ".." || id.find_first_of("/\\") != std::string::npos) {
        fail(ErrorCode::Validation, "entry id '" + id + "' is not a valid directory name");
    }
}

// 8-bit storage moves each scalar by at most half a code.
constexpr double kQuantizationMse = (0.5 / 255.0) * (0.5 / 255.0);

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

CorpusEntry corpus_entry_from_json(const std::string& line, const fs::path& base_dir, const std::string& where) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Parse, where + ": " + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::Validation, where + ": corpus entry must be an object");
    try {
        CorpusEntry e;
        e.id = doc.at("id").get<std::string>();
        e.image_path = resolve(base_dir, doc.at("image_path").get<std::string>());
        e.caption = doc.value("caption", std::string());
        if (doc.contains("similarity") && !doc["similarity"].is_null()) {
            const double s = doc["similarity"].get<double>();
            if (!(s >= -1.0 && s <= 1.0)) fail(ErrorCode::Validation, where + ": similarity outside [-1,1]");
            e.similarity = s;
        }
        if (doc.contains("depth_path") && !doc["depth_path"].is_null()) {
            e.depth_path = resolve(base_dir, doc["depth_path"].get<std::string>());
        }
        if (doc.contains("strokes_path") && !doc["strokes_path"].is_null()) {
            e.strokes_path = resolve(base_dir, doc["strokes_path"].get<std::string>());
        }
        return e;
    } catch (const json::exception& ex) {
        fail(ErrorCode::Validation, where + ": " + ex.what());
    }
}

std::vector<CorpusEntry> read_corpus(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open corpus '" + path.string() + "'");
    const fs::path base = path.parent_path();
    std::vector<CorpusEntry> entries;
    std::set<std::string> ids;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        CorpusEntry e = corpus_entry_from_json(line, base, where);
        if (!ids.insert(e.id).second) fail(ErrorCode::Validation, where + ": duplicate id '" + e.id + "'");
        entries.push_back(std::move(e));
    }
    return entries;
}

FilterResult filter_corpus(std::vector<CorpusEntry> entries, double threshold) {
    FilterResult r;
    for (CorpusEntry& e : entries) {
        if (!e.similarity) {
            e.similarity_missing = true;
            ++r.flagged;
            r.kept.push_back(std::move(e));
        } else if (*e.similarity >= threshold) {
            r.kept.push_back(std::move(e));
        } else {
            ++r.dropped;
        }
    }
    return r;
}

void DatasetConfig::validate() const {
    require(frames >= 2, "dataset: frames must be >= 2");
    require(layer_count() >= 1, "dataset: layers must be >= 1");
    require(metric != metrics::FrameMetric::Ingested, "dataset: ingested metric is only available to eval");
    planner.validate();
}

VideoRecord generate_one(const CorpusEntry& entry, const DatasetConfig& config, const fs::path& out_dir) {
    config.validate();
    check_id(entry.id);
    const RasterImage target = to_rgb(io::read_image(entry.image_path));

    VideoRecord rec;
    rec.id = entry.id;
    rec.similarity_flagged = entry.similarity_missing;

    StrokeList strokes;
    if (entry.strokes_path) {
        strokes = sbr::import_strokes(*entry.strokes_path);
        if (strokes.canvas_width != target.width() || strokes.canvas_height != target.height()) {
            fail(ErrorCode::Validation, entry.strokes_path->string() + ": canvas size differs from the target image");
        }
        rec.backbone = "imported";
    } else {
        sbr::PlannerConfig planner = config.planner;
        planner.seed = derive_seed(config.seed, entry.id);
        planner.jobs = 1;
        strokes = sbr::plan_strokes(target, planner);
        rec.backbone = "builtin";
    }
    rec.stroke_count = strokes.size();

    erasure::EraseSchedule schedule;
    if (strokes.strokes.empty()) {
        schedule = erasure::make_schedule(strokes, {}, config.frames - 1);
    } else {
        const auto scores = erasure::density_scores(strokes);
        schedule = erasure::make_schedule(strokes, erasure::erase_order(strokes, scores), config.frames - 1);
    }
    const KeyframeSequence seq = erasure::render_keyframes(strokes, schedule);
    for (auto it = schedule.frame_stroke_counts.rbegin(); it != schedule.frame_stroke_counts.rend(); ++it) {
        rec.frame_stroke_counts.push_back(*it);
    }

    layering::DepthMap depth;
    if (entry.depth_path) {
        depth = layering::ingest_depth(*entry.depth_path, config.depth_convention);
        if (depth.width != target.width() || depth.height != target.height()) {
            fail(ErrorCode::Validation, entry.depth_path->string() + ": depth size differs from the target image");
        }
        rec.depth_source = "file";
    } else {
        depth = layering::pseudo_depth(target);
        rec.depth_source = "pseudo";
    }
    const auto thresholds = layering::balanced_thresholds(depth, config.layer_count());
    const layering::LayerMasks masks = layering::layer_masks(depth, thresholds);

    const fs::path dir = out_dir / entry.id;
    fs::create_directories(dir);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const std::string name = numbered("frame", i);
        io::write_png(dir / name, seq.frames[i]);
        rec.frames.push_back(entry.id + "/" + name);
    }
    for (std::size_t t = 0; t < masks.masks.size(); ++t) {
        const std::string name = numbered("mask", t + 1);
        io::write_png_mask(dir / name, masks.width, masks.height, masks.masks[t]);
        rec.masks.push_back(entry.id + "/" + name);
    }
    sbr::export_strokes(dir / "strokes.json", strokes);
    io::write_text_atomic(dir / "schedule.json", erasure::schedule_to_json(schedule));
    rec.strokes_file = entry.id + "/strokes.json";
    rec.schedule_file = entry.id + "/schedule.json";

    const RasterImage& final_frame = seq.frames.back();
    rec.final_mse = mse(final_frame, target);
    rec.final_psnr = metrics::psnr(final_frame, target);
    const bool ssim_ok = target.width() >= 11 && target.height() >= 11;
    rec.final_ssim = ssim_ok ? metrics::ssim(final_frame, target) : std::nan("");

    json m = {{"schema", "videometrics/v1"},
              {"metric", metrics::to_string(config.metric)},
              {"final_mse", rec.final_mse},
              {"final_psnr", nullable(rec.final_psnr)},
              {"final_ssim", nullable(rec.final_ssim)},
              {"layer_thresholds", masks.thresholds},
              {"layer_counts", masks.layer_counts()}};
    try {
        const metrics::DdcReport report = metrics::ddc(seq, target, config.metric);
        rec.ddc = report.ddc;
        m["ddc"] = report.ddc;
        m["curve"] = report.curve.values;
        m["theoretical"] = report.theoretical.values;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Degenerate) throw;
        m["ddc"] = nullptr;
        m["ddc_error"] = e.what();
    }
    io::write_text_atomic(dir / "metrics.json", m.dump(2) + "\n");
    rec.metrics_file = entry.id + "/metrics.json";
    return rec;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
    json entries = json::array();
    for (const VideoRecord& r : manifest.entries) {
        entries.push_back({{"id", r.id},
                           {"backbone", r.backbone},
                           {"depth_source", r.depth_source},
                           {"frames", r.frames},
                           {"masks", r.masks},
                           {"strokes", r.strokes_file},
                           {"schedule", r.schedule_file},
                           {"metrics_file", r.metrics_file},
                           {"stroke_count", r.stroke_count},
                           {"frame_stroke_counts", r.frame_stroke_counts},
                           {"ddc", r.ddc ? json(*r.ddc) : json(nullptr)},
                           {"metrics",
                            {{"final_mse", r.final_mse},
                             {"final_psnr", nullable(r.final_psnr)},
                             {"final_ssim", nullable(r.final_ssim)}}},
                           {"similarity_flagged", r.similarity_flagged}});
    }
    json failures = json::array();
    for (const FailureRecord& f : manifest.failures) failures.push_back({{"id", f.id}, {"error", f.error}});
    const json doc = {{"schema", "dataset/v1"},
                      {"backbone", manifest.backbone},
                      {"frames", manifest.frames},
                      {"layers", manifest.layers},
                      {"metric", manifest.metric},
                      {"seed", manifest.seed},
                      {"filtered_out", manifest.filtered_out},
                      {"entries", std::move(entries)},
                      {"failures", std::move(failures)}};
    return doc.dump(2) + "\n";
}

DatasetManifest build_dataset(const std::vector<CorpusEntry>& corpus, const DatasetConfig& config, const fs::path& out_dir,
                              BuildStats* stats) {
    config.validate();
    if (corpus.empty()) fail(ErrorCode::DatasetEmpty, "dataset: corpus is empty");
    const auto started = std::chrono::steady_clock::now();

    FilterResult filtered = filter_corpus(corpus, config.filter_threshold);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory '" + out_dir.string() + "': " + ec.message());

    const std::size_t n = filtered.kept.size();
    std::vector<std::optional<VideoRecord>> records(n);
    std::vector<std::string> errors(n);
    parallel_for(n, config.jobs, [&](std::size_t i) {
        try {
            records[i] = generate_one(filtered.kept[i], config, out_dir);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    DatasetManifest manifest;
    manifest.frames = config.frames;
    manifest.layers = config.layer_count();
    manifest.metric = metrics::to_string(config.metric);
    manifest.seed = config.seed;
    manifest.filtered_out = filtered.dropped;
    std::set<std::string> backbones;
    for (std::size_t i = 0; i < n; ++i) {
        if (records[i]) {
            backbones.insert(records[i]->backbone);
            manifest.entries.push_back(std::move(*records[i]));
        } else {
            manifest.failures.push_back({filtered.kept[i].id, errors[i]});
        }
    }
    manifest.backbone = backbones.size() == 1 ? *backbones.begin() : (backbones.empty() ? "none" : "mixed");

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const double per_day = seconds > 0.0 ? manifest.entries.size() * 86400.0 / seconds : 0.0;
    if (stats) *stats = {seconds, per_day};

    const json info = {{"schema", "runinfo/v1"},
                       {"finished_unix", std::chrono::duration_cast<std::chrono::seconds>(
                                             std::chrono::system_clock::now().time_since_epoch())
                                             .count()},
                       {"seconds", seconds},
                       {"videos", manifest.entries.size()},
                       {"failures", manifest.failures.size()},
                       {"jobs", config.jobs},
                       {"videos_per_day", per_day}};
    io::write_text_atomic(out_dir / "run_info.json", info.dump(2) + "\n");

    if (manifest.entries.empty()) {
        io::write_text_atomic(out_dir / "manifest.json", manifest_to_json(manifest));
        fail(ErrorCode::DatasetEmpty, "dataset: no entry produced a video (" + std::to_string(manifest.failures.size()) +
                                          " failures, " + std::to_string(filtered.dropped) + " filtered out)");
    }
    io::write_text_atomic(out_dir / "manifest.json", manifest_to_json(manifest));
    return manifest;
}

std::vector<std::string> verify_dataset(const fs::path& out_dir) {
    std::vector<std::string> problems;
    auto report = [&](const std::string& msg) { problems.push_back(msg); };
    json doc;
    try {
        doc = json::parse(io::read_text(out_dir / "manifest.json"));
    } catch (const std::exception& e) {
        report(std::string("manifest unreadable: ") + e.what());
        return problems;
    }
    if (doc.value("schema", "") != "dataset/v1") report("manifest schema tag is not dataset/v1");
    const int frames = doc.value("frames", 0);
    const int layers = doc.value("layers", 0);
    for (const json& e : doc.value("entries", json::array())) {
        const std::string id = e.value("id", "?");
        auto where = [&](const std::string& m) { return id + ": " + m; };
        try {
            const auto frame_files = e.at("frames").get<std::vector<std::string>>();
            const auto mask_files = e.at("masks").get<std::vector<std::string>>();
            if (static_cast<int>(frame_files.size()) != frames) report(where("frame count differs from manifest"));
            if (static_cast<int>(mask_files.size()) != layers) report(where("mask count differs from manifest"));

            const StrokeList strokes = sbr::import_strokes(out_dir / e.at("strokes").get<std::string>());
            const erasure::EraseSchedule sched =
                erasure::schedule_from_json(io::read_text(out_dir / e.at("schedule").get<std::string>()));
            const json metrics = json::parse(io::read_text(out_dir / e.at("metrics_file").get<std::string>()));
            if (metrics.value("schema", "") != "videometrics/v1") report(where("metrics schema tag"));

            const auto& counts = sched.frame_stroke_counts;
            if (counts.empty() || counts.front() != strokes.size() || counts.back() != 0) {
                report(where("schedule counts must run from n to 0"));
            }
            for (std::size_t j = 1; j < counts.size(); ++j) {
                if (counts[j] > counts[j - 1]) report(where("schedule counts increase"));
            }
            std::vector<std::size_t> sorted = sched.erase_order;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < sorted.size(); ++i) {
                if (sorted[i] != i) {
                    report(where("erase order is not a permutation"));
                    break;
                }
            }
            if (sched.erase_order.size() != strokes.size()) report(where("erase order length"));

            const RasterImage blank = blank_canvas(strokes.canvas_width, strokes.canvas_height, strokes.background);
            for (std::size_t i = 0; i < frame_files.size(); ++i) {
                const RasterImage f = io::read_image(out_dir / frame_files[i]);
                if (f.width() != strokes.canvas_width || f.height() != strokes.canvas_height) report(where("frame size"));
                if (i == 0 && mse(to_rgb(f), blank) > kQuantizationMse) {
                    report(where("first frame is not the blank canvas"));
                }
            }
            std::vector<std::uint8_t> prev;
            for (std::size_t t = 0; t < mask_files.size(); ++t) {
                int w = 0, h = 0;
                const auto mask = io::read_png_mask(out_dir / mask_files[t], w, h);
                if (w != strokes.canvas_width || h != strokes.canvas_height) report(where("mask size"));
                for (std::size_t p = 0; p < prev.size() && p < mask.size(); ++p) {
                    if (prev[p] && !mask[p]) {
                        report(where("masks are not nested"));
                        break;
                    }
                }
                if (t + 1 == mask_files.size() && std::find(mask.begin(), mask.end(), 0) != mask.end()) {
                    report(where("last mask is not all ones"));
                }
                prev = mask;
            }
        } catch (const std::exception& ex) {
            report(where(ex.what()));
        }
    }
    return problems;
}

}  // namespace ap::dataset
