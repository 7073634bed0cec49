// Experiment CLI: runs seeded episodes from a config file, aggregates result
// directories, and evaluates the closed-form regret bounds.
//
//   releaf run <config> [--seeds a,b,c] [--out dir] [--horizon T] [--threads N]
//   releaf summarize <dir>
//   releaf bounds <config> --at T
//
// Exit code 0 on success; on failure a single "error: ..." line on stderr.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "releaf/bounds.hpp"
#include "releaf/config.hpp"
#include "releaf/csv.hpp"
#include "releaf/episode.hpp"

namespace fs = std::filesystem;
using namespace releaf;

namespace {

constexpr const char* kSummaryHeader =
    "seed,steps,total_regret,explore_regret,exploit_regret,exploration_steps,"
    "exploitation_steps,observation_cost,relevance_hit_rate,max_exploit_inst_regret,"
    "max_interval_level";

constexpr const char* kCheckpointHeader = "seed,t,cum_regret,cum_regret_exploit";

std::string summary_line(std::uint64_t seed, const EpisodeSummary& s) {
    std::ostringstream os;
    os << seed << ',' << s.steps << ',' << format_double(s.total_regret) << ','
       << format_double(s.explore_regret) << ',' << format_double(s.exploit_regret) << ','
       << s.exploration_steps << ',' << s.exploitation_steps << ','
       << format_double(s.observation_cost) << ',' << format_double(s.relevance_hit_rate) << ','
       << format_double(s.max_exploit_inst_regret) << ',' << s.max_interval_level;
    return os.str();
}

int run_command(const std::string& config_path, const std::string& seeds_arg, const std::string& out_arg,
                std::uint64_t horizon_arg, unsigned threads) {
    ExperimentConfig cfg = load_config(config_path);
    if (!seeds_arg.empty()) {
        cfg.seeds.clear();
        std::istringstream in(seeds_arg);
        std::string item;
        while (std::getline(in, item, ',')) {
            if (!item.empty()) cfg.seeds.push_back(std::stoull(item));
        }
    }
    if (!out_arg.empty()) cfg.output_dir = out_arg;
    if (horizon_arg > 0) cfg.horizon = horizon_arg;
    cfg.validate();

    fs::create_directories(cfg.output_dir);

    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.seeds.size())));
    std::vector<EpisodeResult> results(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cfg.seeds.size()) return;
            results[k] = run_episode(cfg, cfg.seeds[k]);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w + 1 < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ofstream summary_file(fs::path(cfg.output_dir) / "summary.csv", std::ios::binary);
    if (!summary_file) throw std::runtime_error("cannot write summary.csv in " + cfg.output_dir);
    summary_file << kSummaryHeader << "\n";
    std::ofstream checkpoint_file;
    if (!cfg.checkpoints.empty()) {
        checkpoint_file.open(fs::path(cfg.output_dir) / "checkpoints.csv", std::ios::binary);
        checkpoint_file << kCheckpointHeader << "\n";
    }

    double total = 0.0;
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
        const auto seed = cfg.seeds[k];
        const auto& result = results[k];
        const fs::path trajectory =
            fs::path(cfg.output_dir) / ("trajectory_seed" + std::to_string(seed) + ".csv");
        emit_csv(result.rows, trajectory.string());
        summary_file << summary_line(seed, result.summary) << "\n";
        for (const auto& cp : result.checkpoints) {
            checkpoint_file << seed << ',' << cp.t << ',' << format_double(cp.cum_regret) << ','
                            << format_double(cp.cum_regret_exploit) << "\n";
        }
        total += result.summary.total_regret;
        std::cout << "seed " << seed << ": steps=" << result.summary.steps
                  << " regret=" << format_double(result.summary.total_regret)
                  << " explore=" << result.summary.exploration_steps
                  << " exploit=" << result.summary.exploitation_steps
                  << " rel_hit=" << format_double(result.summary.relevance_hit_rate) << "\n";
    }
    std::cout << "mean_regret=" << format_double(total / static_cast<double>(cfg.seeds.size()))
              << " episodes=" << cfg.seeds.size() << " out=" << cfg.output_dir << "\n";
    return 0;
}

int summarize_command(const std::string& dir) {
    const fs::path summary_path = fs::path(dir) / "summary.csv";
    std::ifstream in(summary_path);
    if (!in) throw std::runtime_error("cannot open " + summary_path.string());
    std::string line;
    std::getline(in, line);
    if (line != kSummaryHeader) {
        throw std::runtime_error("unexpected summary header in " + summary_path.string());
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> fields;
        std::istringstream ls(line);
        std::string item;
        while (std::getline(ls, item, ',')) fields.push_back(std::stod(item));
        if (fields.size() != 11) throw std::runtime_error("malformed summary row");
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw std::runtime_error("summary.csv has no episodes");

    auto stat = [&](std::size_t col) {
        double mean = 0.0, lo = rows[0][col], hi = rows[0][col];
        for (const auto& r : rows) {
            mean += r[col];
            lo = std::min(lo, r[col]);
            hi = std::max(hi, r[col]);
        }
        mean /= static_cast<double>(rows.size());
        std::ostringstream os;
        os << "mean=" << format_double(mean) << " min=" << format_double(lo)
           << " max=" << format_double(hi);
        return os.str();
    };
    std::cout << "episodes=" << rows.size() << "\n";
    std::cout << "total_regret " << stat(2) << "\n";
    std::cout << "explore_regret " << stat(3) << "\n";
    std::cout << "exploit_regret " << stat(4) << "\n";
    std::cout << "exploration_steps " << stat(5) << "\n";
    std::cout << "relevance_hit_rate " << stat(8) << "\n";
    std::cout << "max_exploit_inst_regret " << stat(9) << "\n";

    // slope of the seed-averaged exploitation regret when checkpoints exist
    const fs::path checkpoint_path = fs::path(dir) / "checkpoints.csv";
    std::ifstream cps(checkpoint_path);
    if (cps) {
        std::getline(cps, line);
        if (line != kCheckpointHeader) throw std::runtime_error("unexpected checkpoints header");
        std::map<std::uint64_t, std::pair<double, int>> by_t;
        while (std::getline(cps, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string seed_s, t_s, cum_s, exp_s;
            std::getline(ls, seed_s, ',');
            std::getline(ls, t_s, ',');
            std::getline(ls, cum_s, ',');
            std::getline(ls, exp_s, ',');
            auto& slot = by_t[std::stoull(t_s)];
            slot.first += std::stod(exp_s);
            slot.second += 1;
        }
        std::vector<std::pair<double, double>> points;
        for (const auto& [t, slot] : by_t) {
            points.emplace_back(static_cast<double>(t), slot.first / slot.second);
        }
        if (points.size() >= 3) {
            try {
                std::cout << "exploit_regret_slope=" << format_double(slope_fit(points)) << "\n";
            } catch (const std::domain_error&) {
                std::cout << "exploit_regret_slope=undefined\n";
            }
        }
    }
    return 0;
}

int bounds_command(const std::string& config_path, double horizon) {
    ExperimentConfig cfg = load_config(config_path);
    cfg.validate();
    const auto bounds = theoretical_bounds(cfg.policy, horizon);
    std::cout << "applicable=" << (bounds.applicable ? "yes" : "no (control numbers are scaled)") << "\n";
    std::cout << "exploit_regret_bound=" << format_double(bounds.exploit_regret) << "\n";
    std::cout << "explore_regret_bound=" << format_double(bounds.explore_regret) << "\n";
    std::cout << "exploration_count_bound=" << format_double(bounds.exploration_count) << "\n";
    std::cout << "regret_exponent=" << format_double(relevance_exponent(cfg.policy.gamma_rel)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relevance-learning contextual bandit experiments"};
    app.require_subcommand(1);

    std::string config_path, seeds_arg, out_arg, dir_arg;
    std::uint64_t horizon_arg = 0;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    double bounds_at = 0.0;

    auto* run = app.add_subcommand("run", "run seeded episodes from a config file");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--seeds", seeds_arg, "comma-separated seed list (overrides the config)");
    run->add_option("--out", out_arg, "output directory (overrides the config)");
    run->add_option("--horizon", horizon_arg, "horizon override");
    run->add_option("--threads", threads, "worker threads for parallel episodes");

    auto* summarize = app.add_subcommand("summarize", "aggregate a result directory");
    summarize->add_option("dir", dir_arg, "directory containing summary.csv")->required();

    auto* bounds = app.add_subcommand("bounds", "evaluate closed-form regret bounds");
    bounds->add_option("config", config_path, "experiment config file")->required();
    bounds->add_option("--at", bounds_at, "horizon T at which to evaluate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(config_path, seeds_arg, out_arg, horizon_arg, threads);
        if (summarize->parsed()) return summarize_command(dir_arg);
        if (bounds->parsed()) return bounds_command(config_path, bounds_at);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
