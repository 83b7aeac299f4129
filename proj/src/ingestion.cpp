#include "mmcount/ingestion.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "mmcount/json_io.hpp"

namespace mmcount::ingestion {

namespace {

bool parse_double(const std::string& field, double& out) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

void sort_and_check(ParseResult& result) {
    bool sorted = std::is_sorted(result.frames.begin(), result.frames.end(),
                                 [](const Frame& a, const Frame& b) {
                                     return a.timestamp_ms < b.timestamp_ms;
                                 });
    if (!sorted) {
        std::stable_sort(result.frames.begin(), result.frames.end(),
                         [](const Frame& a, const Frame& b) {
                             return a.timestamp_ms < b.timestamp_ms;
                         });
        result.warnings.push_back("frames arrived out of timestamp order; re-sorted");
    }
    if (result.frames.empty()) throw EmptyCapture();
}

ParseResult parse_csv(std::istream& in, const SensorSetup& setup) {
    ParseResult result;
    result.setup = setup;
    // frame_index -> frame, first-seen timestamp wins
    std::map<std::int64_t, Frame> frames;
    std::string line;
    std::size_t line_no = 0;
    bool first_data_line = true;
    bool rows_out_of_order = false;
    double last_row_ts = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv(line);
        if (first_data_line) {
            first_data_line = false;
            double probe;
            if (!parse_double(fields[0], probe)) continue;  // header line
        }
        if (fields.size() != 7) {
            throw MalformedRecord(line_no, "expected 7 fields, got " +
                                               std::to_string(fields.size()));
        }
        double vals[7];
        for (int i = 0; i < 7; ++i) {
            if (!parse_double(fields[i], vals[i])) {
                throw MalformedRecord(line_no, "field " + std::to_string(i + 1) +
                                                   " is not numeric: '" + fields[i] + "'");
            }
        }
        const auto index = static_cast<std::int64_t>(vals[0]);
        if (vals[1] < last_row_ts) rows_out_of_order = true;
        last_row_ts = vals[1];
        RadarPoint p{vals[2], vals[3], vals[4], vals[5], vals[6]};
        auto verdict = validate_point(p, setup);
        auto [it, inserted] = frames.try_emplace(index);
        Frame& frame = it->second;
        if (inserted) {
            frame.index = index;
            frame.timestamp_ms = vals[1];
        }
        if (!verdict.accepted) {
            result.rejected.push_back({line_no, verdict.reason});
            continue;
        }
        frame.points.push_back(p);
    }
    result.frames.reserve(frames.size());
    for (auto& [idx, frame] : frames) result.frames.push_back(std::move(frame));
    if (rows_out_of_order) {
        result.warnings.push_back("rows arrived out of timestamp order; frames re-sorted");
    }
    sort_and_check(result);
    return result;
}

ParseResult parse_jsonframes(std::istream& in, const SensorSetup& fallback_setup) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw MalformedRecord(0, std::string("invalid jsonframes document: ") + e.what());
    }
    ParseResult result;
    result.setup = fallback_setup;
    try {
        if (doc.contains("setup")) {
            result.setup = doc.at("setup").get<SensorSetup>();
            result.has_setup = true;
        }
        if (doc.contains("scenario")) {
            result.scenario = doc.at("scenario").get<ScenarioDescriptor>();
        }
        for (const auto& jf : doc.at("frames")) {
            Frame frame;
            frame.index = jf.at("index").get<std::int64_t>();
            frame.timestamp_ms = jf.at("timestamp_ms").get<double>();
            for (const auto& jp : jf.at("points")) {
                if (!jp.is_array() || jp.size() != 5) {
                    throw MalformedRecord(0, "point entries must be [x,y,z,doppler,energy]");
                }
                RadarPoint p{jp[0].get<double>(), jp[1].get<double>(), jp[2].get<double>(),
                             jp[3].get<double>(), jp[4].get<double>()};
                auto verdict = validate_point(p, result.setup);
                if (!verdict.accepted) {
                    result.rejected.push_back({0, verdict.reason});
                    continue;
                }
                frame.points.push_back(p);
            }
            result.frames.push_back(std::move(frame));
        }
    } catch (const json::exception& e) {
        throw MalformedRecord(0, std::string("invalid jsonframes document: ") + e.what());
    }
    sort_and_check(result);
    return result;
}

}  // namespace

ParseResult parse_capture(std::istream& in, Format format, const SensorSetup& setup) {
    return format == Format::Csv ? parse_csv(in, setup) : parse_jsonframes(in, setup);
}

ParseResult parse_capture_file(const std::string& path, const SensorSetup& setup) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open capture file: " + path);
    const Format format = path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
                              ? Format::Csv
                              : Format::JsonFrames;
    return parse_capture(in, format, setup);
}

std::vector<CloudWindow> window_fixed(const std::vector<Frame>& frames, double duration_ms) {
    if (frames.empty()) throw EmptyCapture();
    if (duration_ms <= 0.0) throw InputError("window duration must be > 0");
    const double t_first = frames.front().timestamp_ms;
    std::vector<CloudWindow> windows;
    for (const auto& frame : frames) {
        const auto k = static_cast<std::size_t>(
            std::floor((frame.timestamp_ms - t_first) / duration_ms));
        while (windows.size() <= k) {
            windows.push_back(
                {t_first + static_cast<double>(windows.size()) * duration_ms, duration_ms, {}});
        }
        windows[k].frames.push_back(frame);
    }
    return windows;
}

std::vector<CloudWindow> window_sliding(const std::vector<Frame>& frames, double duration_ms,
                                        double stride_ms) {
    if (frames.empty()) throw EmptyCapture();
    if (stride_ms <= 0.0 || stride_ms > duration_ms) {
        std::ostringstream msg;
        msg << "stride must satisfy 0 < stride <= duration (stride=" << stride_ms
            << ", duration=" << duration_ms << ")";
        throw InvalidStride(msg.str());
    }
    const double t_first = frames.front().timestamp_ms;
    const double t_last = frames.back().timestamp_ms;
    std::vector<CloudWindow> windows;
    for (std::size_t k = 0;; ++k) {
        const double start = t_first + static_cast<double>(k) * stride_ms;
        if (start > t_last) break;
        CloudWindow w{start, duration_ms, {}};
        for (const auto& frame : frames) {
            if (frame.timestamp_ms >= start && frame.timestamp_ms < start + duration_ms) {
                w.frames.push_back(frame);
            }
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

void write_csv(std::ostream& out, const std::vector<Frame>& frames) {
    out << "frame_index,timestamp_ms,x,y,z,doppler,energy\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    };
    for (const auto& frame : frames) {
        for (const auto& p : frame.points) {
            out << frame.index << ',' << fmt(frame.timestamp_ms) << ',' << fmt(p.x) << ','
                << fmt(p.y) << ',' << fmt(p.z) << ',' << fmt(p.doppler) << ',' << fmt(p.energy)
                << '\n';
        }
    }
}

void write_jsonframes(std::ostream& out, const std::vector<Frame>& frames,
                      const SensorSetup& setup, const ScenarioDescriptor& scenario) {
    json doc;
    doc["setup"] = setup;
    doc["scenario"] = scenario;
    doc["frames"] = json::array();
    for (const auto& frame : frames) {
        json jf;
        jf["index"] = frame.index;
        jf["timestamp_ms"] = frame.timestamp_ms;
        auto& pts = jf["points"] = json::array();
        for (const auto& p : frame.points) {
            pts.push_back(json::array({p.x, p.y, p.z, p.doppler, p.energy}));
        }
        doc["frames"].push_back(std::move(jf));
    }
    out << doc.dump(2) << '\n';
}

}  // namespace mmcount::ingestion
