#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "layering/layering.hpp"
#include "metrics/metrics.hpp"
#include "sbr/planner.hpp"

namespace ap::dataset {

namespace fs = std::filesystem;

struct CorpusEntry {
    std::string id;
    fs::path image_path;
    std::string caption;
    std::optional<double> similarity;
    std::optional<fs::path> depth_path;
    /// Strokes from an external renderer; the built-in planner is skipped when set.
    std::optional<fs::path> strokes_path;
    /// Set by filter_corpus when the entry had no similarity score.
    bool similarity_missing = false;
};

/// JSON-lines corpus. Relative paths resolve against the corpus file's directory.
std::vector<CorpusEntry> read_corpus(const fs::path& path);
CorpusEntry corpus_entry_from_json(const std::string& line, const fs::path& base_dir, const std::string& where);

struct FilterResult {
    std::vector<CorpusEntry> kept;
    std::size_t dropped = 0;
    std::size_t flagged = 0;
};

/// Keeps entries with similarity >= threshold; unscored entries are kept and flagged.
FilterResult filter_corpus(std::vector<CorpusEntry> entries, double threshold);

struct DatasetConfig {
    int frames = 12;
    /// 0 selects frames - 2.
    int layers = 0;
    sbr::PlannerConfig planner{};
    metrics::FrameMetric metric = metrics::FrameMetric::SsimDist;
    std::uint64_t seed = 0;
    double filter_threshold = -std::numeric_limits<double>::infinity();
    layering::DepthConvention depth_convention = layering::DepthConvention::LargerIsNearer;
    unsigned jobs = 1;

    int layer_count() const noexcept { return layers > 0 ? layers : frames - 2; }
    void validate() const;
};

struct VideoRecord {
    std::string id;
    std::string backbone;  // builtin | imported
    std::string depth_source;  // file | pseudo
    std::vector<std::string> frames;  // paths relative to the dataset root
    std::vector<std::string> masks;
    std::string strokes_file;
    std::string schedule_file;
    std::string metrics_file;
    std::size_t stroke_count = 0;
    std::vector<std::size_t> frame_stroke_counts;  // paint order
    std::optional<double> ddc;
    double final_mse = 0.0;
    double final_psnr = 0.0;
    double final_ssim = 0.0;
    bool similarity_flagged = false;
};

struct FailureRecord {
    std::string id;
    std::string error;
};

struct DatasetManifest {
    std::string backbone;  // builtin | imported | mixed
    int frames = 0;
    int layers = 0;
    std::string metric;
    std::uint64_t seed = 0;
    std::size_t filtered_out = 0;
    std::vector<VideoRecord> entries;
    std::vector<FailureRecord> failures;
};

struct BuildStats {
    double seconds = 0.0;
    double videos_per_day = 0.0;
};

/// Runs the whole per-image pipeline and writes out_dir/{id}/...
VideoRecord generate_one(const CorpusEntry& entry, const DatasetConfig& config, const fs::path& out_dir);

/// Filters, generates every entry (failures recorded, never fatal) and writes
/// manifest.json last via temp-file rename. Timing goes to run_info.json so the
/// manifest stays byte-identical across identical runs.
DatasetManifest build_dataset(const std::vector<CorpusEntry>& corpus, const DatasetConfig& config, const fs::path& out_dir,
                              BuildStats* stats = nullptr);

std::string manifest_to_json(const DatasetManifest& manifest);

/// Re-reads a dataset from disk and reports every broken invariant (empty when clean).
std::vector<std::string> verify_dataset(const fs::path& out_dir);

}  // namespace ap::dataset
