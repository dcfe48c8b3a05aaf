#pragma once

#include <string>

#include "bsgs/image.hpp"
#include "bsgs/loss.hpp"

namespace bsgs {

/// Per-pixel mean absolute channel difference mapped through a "hot"
/// colormap: r = clamp(3v), g = clamp(3v - 1), b = clamp(3v - 2). Writes the
/// map as PNG and returns it.
Image error_map(const Image& a, const Image& b, const std::string& out_path);

}  // namespace bsgs
