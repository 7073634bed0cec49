#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "releaf/policy.hpp"

namespace releaf {

/// One logged step of an episode. The first group of fields are the columns
/// of the trajectory CSV, in order; context and the estimated relevant tuple
/// of the chosen action are kept in memory only.
struct TrajectoryRow {
    std::uint64_t t = 0;
    Phase phase = Phase::Explore;
    int action = 0;
    bool beta = false;
    std::optional<double> reward_observed;
    double inst_regret = 0.0;
    double cum_regret = 0.0;
    double cum_regret_explore = 0.0;
    double cum_regret_exploit = 0.0;
    bool rel_hit = false;
    unsigned max_interval_level = 0;

    std::vector<double> context;
    std::vector<int> estimated_relevant;  // chosen action, exploit steps only
};

inline const char* kTrajectoryHeader =
    "t,phase,action,beta,reward_observed,inst_regret,cum_regret,"
    "cum_regret_explore,cum_regret_exploit,rel_hit,max_interval_level";

/// Fixed-format double rendering so identical runs emit identical bytes.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void emit_csv(const std::vector<TrajectoryRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    out << kTrajectoryHeader << "\n";
    for (const auto& row : rows) {
        out << row.t << ',' << (row.phase == Phase::Explore ? "explore" : "exploit") << ',' << row.action
            << ',' << (row.beta ? 1 : 0) << ','
            << (row.reward_observed ? format_double(*row.reward_observed) : "") << ','
            << format_double(row.inst_regret) << ',' << format_double(row.cum_regret) << ','
            << format_double(row.cum_regret_explore) << ',' << format_double(row.cum_regret_exploit) << ','
            << (row.rel_hit ? 1 : 0) << ',' << row.max_interval_level << "\n";
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_trajectory_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_trajectory_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrajectoryHeader) throw std::runtime_error("read_trajectory_csv: unexpected header in " + path);
    std::vector<TrajectoryRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 11) throw std::runtime_error("read_trajectory_csv: malformed row in " + path);
        TrajectoryRow row;
        row.t = std::stoull(fields[0]);
        row.phase = fields[1] == "explore" ? Phase::Explore : Phase::Exploit;
        row.action = std::stoi(fields[2]);
        row.beta = fields[3] == "1";
        if (!fields[4].empty()) row.reward_observed = std::stod(fields[4]);
        row.inst_regret = std::stod(fields[5]);
        row.cum_regret = std::stod(fields[6]);
        row.cum_regret_explore = std::stod(fields[7]);
        row.cum_regret_exploit = std::stod(fields[8]);
        row.rel_hit = fields[9] == "1";
        row.max_interval_level = static_cast<unsigned>(std::stoul(fields[10]));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace releaf
