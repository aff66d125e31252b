#pragma once

#include <cstddef>
#include <vector>

#include "core/image.hpp"

namespace ap {

/// Ordered frames of one painting process, blank canvas first, finished painting last.
struct KeyframeSequence {
    std::vector<RasterImage> frames;
    /// Stroke indices present in each frame (ascending); empty when frames came from disk.
    std::vector<std::vector<std::size_t>> stroke_sets;

    std::size_t size() const noexcept { return frames.size(); }
};

}  // namespace ap
