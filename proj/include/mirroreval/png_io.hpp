#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mirroreval/render.hpp"

namespace mirroreval {

// Lossless PNG encoding of an RGB frame (in memory / to disk).
std::vector<std::uint8_t> encode_png(const Frame& frame);
void write_png(const std::string& path, const Frame& frame);

}  // namespace mirroreval
