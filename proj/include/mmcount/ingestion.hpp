#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmcount/types.hpp"

namespace mmcount::ingestion {

enum class Format { Csv, JsonFrames };

/// One input row whose point failed validation. Reported, never silently
/// dropped.
struct RejectedRow {
    std::size_t line = 0;  // 1-based source line (0 for jsonframes)
    std::string reason;
};

struct ParseResult {
    std::vector<Frame> frames;  // sorted by timestamp
    SensorSetup setup;
    ScenarioDescriptor scenario;
    bool has_setup = false;     // jsonframes carries setup+scenario inline
    std::vector<RejectedRow> rejected;
    std::vector<std::string> warnings;
};

/// Parse a capture stream.
///
/// CSV columns: frame_index,timestamp_ms,x,y,z,doppler,energy. An optional
/// header line is detected by a non-numeric first field. jsonframes is one
/// document: {"setup": {...}, "scenario": {...}, "frames": [...]}.
///
/// Throws MalformedRecord on structural defects and EmptyCapture when no
/// frame survives.
ParseResult parse_capture(std::istream& in, Format format, const SensorSetup& setup);

ParseResult parse_capture_file(const std::string& path, const SensorSetup& setup);

/// Consecutive non-overlapping windows covering [t_first, t_last]; every
/// frame lands in exactly one window, the trailing partial window is kept.
std::vector<CloudWindow> window_fixed(const std::vector<Frame>& frames,
                                      double duration_ms = 200.0);

/// Window k starts at t_first + k*stride; consecutive windows overlap by
/// duration - stride. Throws InvalidStride unless 0 < stride <= duration.
std::vector<CloudWindow> window_sliding(const std::vector<Frame>& frames, double duration_ms,
                                        double stride_ms);

void write_csv(std::ostream& out, const std::vector<Frame>& frames);
void write_jsonframes(std::ostream& out, const std::vector<Frame>& frames,
                      const SensorSetup& setup, const ScenarioDescriptor& scenario);

}  // namespace mmcount::ingestion
