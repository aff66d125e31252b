#include "core/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

// jpeglib.h expects stdio to be included first.
#include <jpeglib.h>

#include "core/error.hpp"

namespace ap::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) fail(ErrorCode::Io, "cannot open '" + path.string() + "': " + std::strerror(errno));
    return f;
}

// ---------------------------------------------------------------------------
// libpng reports errors by longjmp; the raw readers/writers below keep only
// trivially destructible locals and hand back malloc'd buffers.

struct PngErrorSink {
    char message[256];
};

void png_error_handler(png_structp png, png_const_charp msg) {
    auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
    std::snprintf(sink->message, sizeof sink->message, "%s", msg);
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngRaw {
    png_uint_32 width;
    png_uint_32 height;
    int bit_depth;   // 8 or 16 after transforms
    int channels;    // 1..4
    int orig_bit_depth;
    int orig_color_type;
    unsigned char* pixels;  // malloc'd, rows packed
    std::size_t row_bytes;
};

bool read_png_raw(std::FILE* fp, PngRaw* out, PngErrorSink* sink, bool expand_low_bits) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, png_error_handler, png_warning_handler);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    out->pixels = nullptr;
    png_bytep* rows = nullptr;
    if (setjmp(png_jmpbuf(png))) {
        std::free(rows);
        std::free(out->pixels);
        out->pixels = nullptr;
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    out->orig_bit_depth = png_get_bit_depth(png, info);
    out->orig_color_type = png_get_color_type(png, info);
    if (out->orig_color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (expand_low_bits && out->orig_color_type == PNG_COLOR_TYPE_GRAY && out->orig_bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (out->orig_bit_depth == 16) png_set_swap(png);  // native little-endian uint16 on read
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    out->width = png_get_image_width(png, info);
    out->height = png_get_image_height(png, info);
    out->bit_depth = png_get_bit_depth(png, info);
    out->channels = png_get_channels(png, info);
    out->row_bytes = png_get_rowbytes(png, info);

    out->pixels = static_cast<unsigned char*>(std::malloc(out->row_bytes * out->height));
    rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * out->height));
    if (!out->pixels || !rows) png_error(png, "out of memory");
    for (png_uint_32 y = 0; y < out->height; ++y) rows[y] = out->pixels + y * out->row_bytes;
    png_read_image(png, rows);
    png_read_end(png, nullptr);
    std::free(rows);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

struct PngWriteSpec {
    png_uint_32 width;
    png_uint_32 height;
    int bit_depth;
    int color_type;
    const unsigned char* pixels;
    std::size_t row_bytes;
};

bool write_png_raw(std::FILE* fp, const PngWriteSpec* spec, PngErrorSink* sink) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, png_error_handler, png_warning_handler);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, spec->width, spec->height, spec->bit_depth, spec->color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (spec->bit_depth == 16) png_set_swap(png);
    for (png_uint_32 y = 0; y < spec->height; ++y) {
        png_write_row(png, const_cast<png_bytep>(spec->pixels + y * spec->row_bytes));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

struct MallocFree {
    void operator()(unsigned char* p) const noexcept { std::free(p); }
};

PngRaw read_png_checked(const std::filesystem::path& path, std::unique_ptr<unsigned char, MallocFree>& owner,
                        bool expand_low_bits) {
    FilePtr fp = open_file(path, "rb");
    PngRaw raw{};
    PngErrorSink sink{};
    if (!read_png_raw(fp.get(), &raw, &sink, expand_low_bits)) {
        fail(ErrorCode::Format, "cannot decode PNG '" + path.string() + "': " + sink.message);
    }
    owner.reset(raw.pixels);
    return raw;
}

void write_png_checked(const std::filesystem::path& path, const PngWriteSpec& spec) {
    FilePtr fp = open_file(path, "wb");
    PngErrorSink sink{};
    if (!write_png_raw(fp.get(), &spec, &sink)) {
        fail(ErrorCode::Io, "cannot encode PNG '" + path.string() + "': " + sink.message);
    }
    if (std::fflush(fp.get()) != 0) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

RasterImage decode_png(const std::filesystem::path& path) {
    std::unique_ptr<unsigned char, MallocFree> owner;
    const PngRaw raw = read_png_checked(path, owner, true);
    const int w = static_cast<int>(raw.width);
    const int h = static_cast<int>(raw.height);
    // Gray+alpha is widened to RGBA; everything else keeps its channel count.
    const int out_channels = raw.channels == 2 ? 4 : raw.channels;
    std::vector<float> data(static_cast<std::size_t>(w) * h * out_channels);
    const double scale = raw.bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    for (int y = 0; y < h; ++y) {
        const unsigned char* row = raw.pixels + y * raw.row_bytes;
        for (int x = 0; x < w; ++x) {
            double src[4];
            for (int c = 0; c < raw.channels; ++c) {
                const std::size_t i = static_cast<std::size_t>(x) * raw.channels + c;
                if (raw.bit_depth == 16) {
                    std::uint16_t v;
                    std::memcpy(&v, row + 2 * i, 2);
                    src[c] = v * scale;
                } else {
                    src[c] = row[i] * scale;
                }
            }
            float* dst = &data[(static_cast<std::size_t>(y) * w + x) * out_channels];
            if (raw.channels == 2) {
                dst[0] = dst[1] = dst[2] = static_cast<float>(src[0]);
                dst[3] = static_cast<float>(src[1]);
            } else {
                for (int c = 0; c < raw.channels; ++c) dst[c] = static_cast<float>(src[c]);
            }
        }
    }
    return RasterImage(w, h, out_channels, std::move(data));
}

// ---------------------------------------------------------------------------
// libjpeg

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

struct JpegRaw {
    int width;
    int height;
    int channels;
    unsigned char* pixels;
};

bool read_jpeg_raw(std::FILE* fp, JpegRaw* out, JpegErrorMgr* err) {
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&err->pub);
    err->pub.error_exit = jpeg_error_exit;
    out->pixels = nullptr;
    if (setjmp(err->jump)) {
        jpeg_destroy_decompress(&cinfo);
        std::free(out->pixels);
        out->pixels = nullptr;
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    if (cinfo.jpeg_color_space != JCS_GRAYSCALE) cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    out->width = static_cast<int>(cinfo.output_width);
    out->height = static_cast<int>(cinfo.output_height);
    out->channels = cinfo.output_components;
    const std::size_t stride = static_cast<std::size_t>(out->width) * out->channels;
    out->pixels = static_cast<unsigned char*>(std::malloc(stride * out->height));
    if (!out->pixels) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out->pixels + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

RasterImage decode_jpeg(const std::filesystem::path& path) {
    FilePtr fp = open_file(path, "rb");
    JpegRaw raw{};
    JpegErrorMgr err{};
    if (!read_jpeg_raw(fp.get(), &raw, &err)) {
        fail(ErrorCode::Format, "cannot decode JPEG '" + path.string() + "': " + err.message);
    }
    std::unique_ptr<unsigned char, MallocFree> owner(raw.pixels);
    std::vector<float> data(static_cast<std::size_t>(raw.width) * raw.height * raw.channels);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = raw.pixels[i] / 255.0f;
    return RasterImage(raw.width, raw.height, raw.channels, std::move(data));
}

unsigned char to_byte(float v) noexcept {
    const float c = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
    return static_cast<unsigned char>(c * 255.0f + 0.5f);
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path) {
    unsigned char sig[8] = {};
    {
        FilePtr fp = open_file(path, "rb");
        const std::size_t n = std::fread(sig, 1, sizeof sig, fp.get());
        if (n < 3) fail(ErrorCode::Format, "'" + path.string() + "' is too short to be an image");
    }
    if (png_sig_cmp(sig, 0, 8) == 0) return decode_png(path);
    if (sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return decode_jpeg(path);
    fail(ErrorCode::Format, "'" + path.string() + "' is neither PNG nor JPEG");
}

void write_png(const std::filesystem::path& path, const RasterImage& image) {
    require(!image.empty(), "write_png: empty image");
    const int ch = image.channels();
    std::vector<unsigned char> bytes(image.data().size());
    const auto src = image.data();
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(src[i]);
    const int color_type = ch == 1 ? PNG_COLOR_TYPE_GRAY : (ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGB_ALPHA);
    const PngWriteSpec spec{static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                            color_type, bytes.data(), static_cast<std::size_t>(image.width()) * ch};
    write_png_checked(path, spec);
}

Gray16 read_png_gray16(const std::filesystem::path& path) {
    std::unique_ptr<unsigned char, MallocFree> owner;
    const PngRaw raw = read_png_checked(path, owner, false);
    if (raw.orig_color_type != PNG_COLOR_TYPE_GRAY || raw.orig_bit_depth != 16) {
        fail(ErrorCode::Format, "'" + path.string() + "': depth PNG must be 16-bit grayscale (got bit depth " +
                                    std::to_string(raw.orig_bit_depth) + ", color type " +
                                    std::to_string(raw.orig_color_type) + ")");
    }
    Gray16 out{static_cast<int>(raw.width), static_cast<int>(raw.height), {}};
    out.samples.resize(static_cast<std::size_t>(out.width) * out.height);
    for (int y = 0; y < out.height; ++y) {
        std::memcpy(&out.samples[static_cast<std::size_t>(y) * out.width], raw.pixels + y * raw.row_bytes,
                    static_cast<std::size_t>(out.width) * 2);
    }
    return out;
}

void write_png_gray16(const std::filesystem::path& path, const Gray16& image) {
    require(image.width >= 1 && image.height >= 1, "write_png_gray16: empty image");
    require(image.samples.size() == static_cast<std::size_t>(image.width) * image.height,
            "write_png_gray16: sample count mismatch");
    const PngWriteSpec spec{static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 16,
                            PNG_COLOR_TYPE_GRAY, reinterpret_cast<const unsigned char*>(image.samples.data()),
                            static_cast<std::size_t>(image.width) * 2};
    write_png_checked(path, spec);
}

void write_png_mask(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& mask) {
    require(width >= 1 && height >= 1, "write_png_mask: empty mask");
    require(mask.size() == static_cast<std::size_t>(width) * height, "write_png_mask: size mismatch");
    const std::size_t row_bytes = (static_cast<std::size_t>(width) + 7) / 8;
    std::vector<unsigned char> packed(row_bytes * height, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (mask[static_cast<std::size_t>(y) * width + x]) {
                packed[y * row_bytes + x / 8] |= static_cast<unsigned char>(0x80u >> (x % 8));
            }
        }
    }
    const PngWriteSpec spec{static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 1, PNG_COLOR_TYPE_GRAY,
                            packed.data(), row_bytes};
    write_png_checked(path, spec);
}

std::vector<std::uint8_t> read_png_mask(const std::filesystem::path& path, int& width, int& height) {
    const RasterImage img = read_image(path);
    const RasterImage gray = to_gray(img);
    width = gray.width();
    height = gray.height();
    std::vector<std::uint8_t> mask(gray.pixel_count());
    const auto d = gray.data();
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = d[i] >= 0.5f ? 1 : 0;
    return mask;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::Io, "cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) fail(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::Io, "cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace ap::io
