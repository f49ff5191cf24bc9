#pragma once

#include <filesystem>

#include "sdg/image.hpp"

namespace sdg {

// 8-bit PNG I/O (gray, RGB or RGBA depending on image.channels).
// Writing is deterministic: fixed zlib level and filter strategy.
void write_png(const std::filesystem::path& path, const ImageU8& image);
ImageU8 read_png(const std::filesystem::path& path);

}  // namespace sdg
