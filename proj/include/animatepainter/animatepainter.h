/*
 * animatepainter C API.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions return AP_OK or an error status; the message for the most recent
 * failure on the calling thread is available from ap_last_error().
 * Output handles are only written on success.
 */
#ifndef ANIMATEPAINTER_H
#define ANIMATEPAINTER_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ANIMATEPAINTER_BUILD)
#    define AP_API __declspec(dllexport)
#  else
#    define AP_API __declspec(dllimport)
#  endif
#else
#  define AP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ap_status {
    AP_OK = 0,
    AP_ERR_INVALID_ARGUMENT = 1,
    AP_ERR_IO = 2,
    AP_ERR_PARSE = 3,
    AP_ERR_VALIDATION = 4,
    AP_ERR_FORMAT = 5,
    AP_ERR_NUMERICAL = 6,
    AP_ERR_DEGENERATE = 7,
    AP_ERR_INPUT = 8,
    AP_ERR_DATASET_EMPTY = 9,
    AP_ERR_INTERNAL = 10
} ap_status;

typedef enum ap_frame_metric {
    AP_METRIC_MSE_DIST = 0,
    AP_METRIC_SSIM_DIST = 1,
    AP_METRIC_INGESTED = 2
} ap_frame_metric;

typedef enum ap_depth_convention {
    AP_DEPTH_LARGER_IS_NEARER = 0,
    AP_DEPTH_LARGER_IS_FARTHER = 1
} ap_depth_convention;

typedef struct ap_image_t* ap_image;
typedef struct ap_strokes_t* ap_strokes;
typedef struct ap_schedule_t* ap_schedule;
typedef struct ap_sequence_t* ap_sequence;
typedef struct ap_depth_t* ap_depth;
typedef struct ap_layers_t* ap_layers;
typedef struct ap_ddc_report_t* ap_ddc_report;

AP_API const char* ap_version(void);
AP_API const char* ap_status_string(ap_status status);
/* Message of the last failure on this thread; empty string if none. */
AP_API const char* ap_last_error(void);
/* Releases strings returned by *_to_json functions. */
AP_API void ap_string_free(char* s);

/* ---- images ---------------------------------------------------------- */

AP_API ap_status ap_image_blank(int width, int height, float r, float g, float b, ap_image* out);
/* channels: 1, 3 or 4; data holds width*height*channels scalars in [0,1]. */
AP_API ap_status ap_image_from_data(int width, int height, int channels, const float* data, ap_image* out);
/* PNG or JPEG; always returns a 3-channel image. */
AP_API ap_status ap_image_load(const char* path, ap_image* out);
AP_API ap_status ap_image_save_png(ap_image image, const char* path);
AP_API int ap_image_width(ap_image image);
AP_API int ap_image_height(ap_image image);
AP_API int ap_image_channels(ap_image image);
/* Borrowed pointer valid until the image is freed. */
AP_API const float* ap_image_data(ap_image image);
AP_API void ap_image_free(ap_image image);

AP_API ap_status ap_mse(ap_image a, ap_image b, double* out);
/* Identical images yield +infinity. */
AP_API ap_status ap_psnr(ap_image a, ap_image b, double* out);
AP_API ap_status ap_ssim(ap_image a, ap_image b, double* out);

/* ---- strokes --------------------------------------------------------- */

#define AP_MAX_LEVELS 16

typedef struct ap_planner_config {
    int levels;
    int strokes_per_level[AP_MAX_LEVELS];
    int candidates_per_cell;
    uint64_t seed;
    double min_improvement;
    float background[3];
    unsigned jobs;
} ap_planner_config;

AP_API void ap_planner_config_default(ap_planner_config* config);
AP_API ap_status ap_plan_strokes(ap_image target, const ap_planner_config* config, ap_strokes* out);
AP_API ap_status ap_strokes_load(const char* path, ap_strokes* out);
AP_API ap_status ap_strokes_save(ap_strokes strokes, const char* path);
AP_API ap_status ap_strokes_to_json(ap_strokes strokes, char** out);
AP_API size_t ap_strokes_count(ap_strokes strokes);
AP_API int ap_strokes_canvas_width(ap_strokes strokes);
AP_API int ap_strokes_canvas_height(ap_strokes strokes);
AP_API ap_status ap_strokes_render(ap_strokes strokes, ap_image* out);
/* Density score of every stroke; `scores` must hold ap_strokes_count() entries. */
AP_API ap_status ap_strokes_density(ap_strokes strokes, size_t* scores);
AP_API void ap_strokes_free(ap_strokes strokes);

/* ---- erasure schedules and keyframes ---------------------------------- */

/* Density-ordered erase schedule with `steps` steps (steps + 1 frames). */
AP_API ap_status ap_schedule_build(ap_strokes strokes, int steps, ap_schedule* out);
AP_API size_t ap_schedule_frame_count(ap_schedule schedule);
AP_API size_t ap_schedule_count_at(ap_schedule schedule, size_t erase_step);
AP_API ap_status ap_schedule_save(ap_schedule schedule, const char* path);
AP_API void ap_schedule_free(ap_schedule schedule);

/* Frames in paint order (blank first). */
AP_API ap_status ap_keyframes_render(ap_strokes strokes, ap_schedule schedule, ap_sequence* out);
/* frame_%02d.png files of a directory, in name order. */
AP_API ap_status ap_sequence_load_dir(const char* dir, ap_sequence* out);
/* Writes frame_%02d.png files. */
AP_API ap_status ap_sequence_save_dir(ap_sequence seq, const char* dir);
AP_API size_t ap_sequence_size(ap_sequence seq);
/* Returns a new image handle owned by the caller. */
AP_API ap_status ap_sequence_frame(ap_sequence seq, size_t index, ap_image* out);
AP_API void ap_sequence_free(ap_sequence seq);

/* ---- depth and layering ----------------------------------------------- */

AP_API ap_status ap_depth_load(const char* path, ap_depth_convention convention, ap_depth* out);
AP_API ap_status ap_depth_pseudo(ap_image image, ap_depth* out);
AP_API int ap_depth_width(ap_depth depth);
AP_API int ap_depth_height(ap_depth depth);
AP_API void ap_depth_free(ap_depth depth);

AP_API ap_status ap_layers_build(ap_depth depth, int layers, ap_layers* out);
AP_API int ap_layers_count(ap_layers layers);
/* Borrowed width*height 0/1 bytes for cumulative mask t (0-based). */
AP_API const uint8_t* ap_layers_mask(ap_layers layers, int t);
/* mask_%02d.png (1-bit) for t = 1..T plus layers.json (layers/v1). */
AP_API ap_status ap_layers_save(ap_layers layers, const char* dir);
/* layered_%02d.png: image where each mask is set, background elsewhere. */
AP_API ap_status ap_layers_save_images(ap_layers layers, ap_image image, float r, float g, float b, const char* dir);
AP_API void ap_layers_free(ap_layers layers);

/* ---- metrics ----------------------------------------------------------- */

AP_API double ap_dtw(const double* a, size_t n, const double* b, size_t m, ap_status* status);
/* `scores_path` (framescores/v1) is required for AP_METRIC_INGESTED, ignored otherwise. */
AP_API ap_status ap_ddc(ap_sequence seq, ap_image target, ap_frame_metric metric, const char* scores_path,
                        ap_ddc_report* out);
AP_API double ap_ddc_value(ap_ddc_report report);
AP_API size_t ap_ddc_length(ap_ddc_report report);
AP_API double ap_ddc_curve_at(ap_ddc_report report, size_t i);
AP_API double ap_ddc_theoretical_at(ap_ddc_report report, size_t i);
AP_API ap_status ap_ddc_to_json(ap_ddc_report report, char** out);
AP_API ap_status ap_ddc_to_csv(ap_ddc_report report, char** out);
AP_API void ap_ddc_free(ap_ddc_report report);

/* ---- dataset ------------------------------------------------------------ */

typedef struct ap_dataset_config {
    int frames;
    int layers; /* 0 selects frames - 2 */
    ap_planner_config planner;
    ap_frame_metric metric;
    uint64_t seed;
    int filter_enabled;
    double filter_threshold;
    ap_depth_convention depth_convention;
    unsigned jobs;
} ap_dataset_config;

typedef struct ap_dataset_summary {
    size_t corpus_entries;
    size_t videos;
    size_t failures;
    size_t filtered_out;
    size_t flagged;
    double seconds;
    double videos_per_day;
} ap_dataset_summary;

AP_API void ap_dataset_config_default(ap_dataset_config* config);
/* Number of entries in a JSON-lines corpus that survive the filter (when enabled). */
AP_API ap_status ap_corpus_filter_count(const char* corpus_path, const ap_dataset_config* config, size_t* kept,
                                        size_t* flagged);
AP_API ap_status ap_dataset_build(const char* corpus_path, const ap_dataset_config* config, const char* out_dir,
                                  ap_dataset_summary* summary);
/* Number of invariant violations found when re-reading a dataset directory. */
AP_API ap_status ap_dataset_verify(const char* out_dir, size_t* violations);

/* ---- depth-fusion math self check ---------------------------------------- */

typedef struct ap_dfcheck_report {
    double max_row_sum_error;
    double single_key_error;
    double loss_reduction_error;
    double gradient_error;
    int passed;
} ap_dfcheck_report;

AP_API ap_status ap_dfcheck(uint64_t seed, ap_dfcheck_report* out);

#ifdef __cplusplus
}
#endif

#endif /* ANIMATEPAINTER_H */
