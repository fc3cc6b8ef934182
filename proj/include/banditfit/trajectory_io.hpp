#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "banditfit/partition_model.hpp"

namespace banditfit {

// Malformed content (bad header, bad row) -> ParseError; filesystem trouble
// (missing file, unwritable directory) -> IoError.
class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest decimal representation that parses back to the same double, so
// write -> read -> write is byte-identical.
inline std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text, int row) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError("trajectory csv: bad number '" + text + "' at row " +
                         std::to_string(row));
    return value;
}

inline constexpr const char* kTrajectoryHeader = "trial,object_id,action,reward";

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << kTrajectoryHeader << '\n';
    for (int t = 0; t < traj.length(); ++t) {
        const std::size_t i = static_cast<std::size_t>(t);
        out << (t + 1) << ',' << traj.contexts[i] << ',' << traj.actions[i] << ','
            << format_double(traj.rewards[i]) << '\n';
    }
}

inline void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    write_trajectory_csv(traj, out);
    if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline int parse_int(const std::string& text, int row, const char* what) {
    int value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ParseError(std::string("trajectory csv: bad ") + what + " '" + text +
                         "' at row " + std::to_string(row));
    return value;
}

}  // namespace detail

// Reads the trial,object_id,action,reward schema. Rows are validated as
// they are read; errors name the offending 1-based data row.
inline Trajectory read_trajectory_csv(std::istream& in, int action_count = 2) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("trajectory csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrajectoryHeader)
        throw ParseError("trajectory csv: missing header '" + std::string(kTrajectoryHeader) +
                         "'");
    Trajectory traj;
    traj.action_count = action_count;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() != 4)
            throw ParseError("trajectory csv: expected 4 fields at row " + std::to_string(row));
        const int trial = detail::parse_int(fields[0], row, "trial");
        if (trial != row)
            throw ParseError("trajectory csv: non-consecutive trial at row " +
                             std::to_string(row));
        const int object_id = detail::parse_int(fields[1], row, "object_id");
        if (object_id < 1)
            throw ParseError("trajectory csv: object_id must be >= 1 at row " +
                             std::to_string(row));
        const int action = detail::parse_int(fields[2], row, "action");
        if (action < 1 || action > action_count)
            throw ParseError("trajectory csv: action out of range at row " + std::to_string(row));
        const double reward = parse_double(fields[3], row);
        if (!(reward >= 0.0 && reward <= 1.0))
            throw ParseError("trajectory csv: reward outside [0,1] at row " +
                             std::to_string(row));
        traj.contexts.push_back(object_id);
        traj.actions.push_back(action);
        traj.rewards.push_back(reward);
    }
    if (row == 0) throw ParseError("trajectory csv: no data rows");
    return traj;
}

inline Trajectory ingest_trajectory_csv(const std::filesystem::path& path,
                                        int action_count = 2) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    return read_trajectory_csv(in, action_count);
}

}  // namespace banditfit
