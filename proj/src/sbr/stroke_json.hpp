#pragma once

#include <filesystem>
#include <string>

#include "core/stroke.hpp"

namespace ap::sbr {

inline constexpr const char* kStrokesSchema = "strokes/v1";

/// Serializes to the strokes/v1 document (2-space indented, trailing newline).
std::string strokes_to_json(const StrokeList& list);

/// Parses and validates a strokes/v1 document. Rotations are folded into [0, pi);
/// strokes are reordered by `index`. `source` labels diagnostics.
StrokeList strokes_from_json(const std::string& text, const std::string& source = "<memory>");

void export_strokes(const std::filesystem::path& path, const StrokeList& list);
StrokeList import_strokes(const std::filesystem::path& path);

}  // namespace ap::sbr
