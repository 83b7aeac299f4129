#pragma once

#include <cstdint>
#include <vector>

namespace mmcount::png {

/// Encode 8-bit RGB pixels (row-major, top row first) as a PNG byte stream.
/// The zlib payload uses stored deflate blocks, so output is byte-for-byte
/// deterministic.
std::vector<std::uint8_t> encode_rgb8(const std::vector<std::uint8_t>& rgb, int width,
                                      int height);

}  // namespace mmcount::png
