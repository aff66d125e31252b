#include "sbr/stroke_json.hpp"

#include <algorithm>
#include <json.hpp>

#include "core/error.hpp"
#include "core/image_io.hpp"

namespace ap::sbr {

using nlohmann::json;

namespace {

json rgb_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

int line_of(const std::string& text, std::size_t byte) {
    const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
    return 1 + static_cast<int>(std::count(text.begin(), end, '\n'));
}

const json& field(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(ErrorCode::Validation, where + ": missing field '" + key + "'");
    return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) fail(ErrorCode::Validation, where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

Rgb color(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
        fail(ErrorCode::Validation, where + ": field '" + key + "' must be [r,g,b]");
    }
    return Rgb{v[0].get<float>(), v[1].get<float>(), v[2].get<float>()};
}

}  // namespace

std::string strokes_to_json(const StrokeList& list) {
    json strokes = json::array();
    for (const Stroke& s : list.strokes) {
        strokes.push_back({{"cx", s.cx},
                           {"cy", s.cy},
                           {"len", s.len},
                           {"thick", s.thick},
                           {"rot", s.rotation},
                           {"color", rgb_json(s.color)},
                           {"opacity", s.opacity},
                           {"index", s.index}});
    }
    const json doc = {{"schema", kStrokesSchema},
                      {"canvas", {{"w", list.canvas_width}, {"h", list.canvas_height}, {"bg", rgb_json(list.background)}}},
                      {"strokes", std::move(strokes)}};
    return doc.dump(2) + "\n";
}

StrokeList strokes_from_json(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Parse, source + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::Parse, source + ": top level must be an object");
    const auto schema = doc.find("schema");
    if (schema == doc.end() || !schema->is_string() || schema->get<std::string>() != kStrokesSchema) {
        fail(ErrorCode::Validation, source + ": field 'schema' must be \"" + std::string(kStrokesSchema) + "\"");
    }

    StrokeList list;
    const json& canvas = field(doc, "canvas", source);
    if (!canvas.is_object()) fail(ErrorCode::Validation, source + ": field 'canvas' must be an object");
    const double w = number(canvas, "w", source + ": canvas");
    const double h = number(canvas, "h", source + ": canvas");
    if (w < 1 || h < 1 || w != static_cast<int>(w) || h != static_cast<int>(h)) {
        fail(ErrorCode::Validation, source + ": canvas w/h must be positive integers");
    }
    list.canvas_width = static_cast<int>(w);
    list.canvas_height = static_cast<int>(h);
    list.background = color(canvas, "bg", source + ": canvas");

    const json& strokes = field(doc, "strokes", source);
    if (!strokes.is_array()) fail(ErrorCode::Validation, source + ": field 'strokes' must be an array");
    list.strokes.reserve(strokes.size());
    for (std::size_t i = 0; i < strokes.size(); ++i) {
        const json& js = strokes[i];
        const std::string where = source + ": stroke " + std::to_string(i);
        if (!js.is_object()) fail(ErrorCode::Validation, where + ": must be an object");
        const json& idx = field(js, "index", where);
        if (!idx.is_number_integer() || idx.get<long long>() < 0) {
            fail(ErrorCode::Validation, where + ": field 'index' must be a non-negative integer");
        }
        Stroke s;
        s.index = idx.get<std::size_t>();
        const std::string named = source + ": stroke " + std::to_string(s.index);
        s.cx = number(js, "cx", named);
        s.cy = number(js, "cy", named);
        s.len = number(js, "len", named);
        s.thick = number(js, "thick", named);
        s.rotation = normalize_rotation(number(js, "rot", named));
        s.color = color(js, "color", named);
        s.opacity = number(js, "opacity", named);
        try {
            validate_stroke(s);
        } catch (const Error& e) {
            fail(ErrorCode::Validation, source + ": " + e.what());
        }
        list.strokes.push_back(s);
    }
    std::sort(list.strokes.begin(), list.strokes.end(),
              [](const Stroke& a, const Stroke& b) { return a.index < b.index; });
    try {
        validate_stroke_list(list);
    } catch (const Error& e) {
        fail(ErrorCode::Validation, source + ": " + e.what());
    }
    return list;
}

void export_strokes(const std::filesystem::path& path, const StrokeList& list) {
    io::write_text_atomic(path, strokes_to_json(list));
}

StrokeList import_strokes(const std::filesystem::path& path) {
    return strokes_from_json(io::read_text(path), path.string());
}

}  // namespace ap::sbr
