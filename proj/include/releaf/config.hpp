#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "releaf/episode.hpp"

namespace releaf {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    return parts;
}

/// Flat key-value file with [section] headers and # comments. Keys are
/// reported as "section.key"; every key must be consumed exactly once.
class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& in, const std::string& origin) {
        KeyValueFile file;
        file.origin_ = origin;
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') file.fail(lineno, "unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) file.fail(lineno, "empty section name");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) file.fail(lineno, "expected key = value");
            const std::string key = section + "." + trim(line.substr(0, eq));
            if (file.values_.count(key)) file.fail(lineno, "duplicate key " + key);
            file.values_[key] = trim(line.substr(eq + 1));
        }
        return file;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    std::string require_string(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::invalid_argument(origin_ + ": missing required key " + key);
        consumed_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return parse_double(key, get_string(key, ""));
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const std::string raw = get_string(key, "");
        try {
            return std::stoull(raw);
        } catch (const std::exception&) {
            throw std::invalid_argument(origin_ + ": key " + key + " is not an unsigned integer: " + raw);
        }
    }

    int get_int(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        const std::string raw = get_string(key, "");
        try {
            return std::stoi(raw);
        } catch (const std::exception&) {
            throw std::invalid_argument(origin_ + ": key " + key + " is not an integer: " + raw);
        }
    }

    std::vector<std::uint64_t> get_u64_list(const std::string& key, std::vector<std::uint64_t> fallback) {
        if (!has(key)) return fallback;
        std::vector<std::uint64_t> out;
        for (const auto& item : split(get_string(key, ""), ',')) {
            if (item.empty()) continue;
            try {
                out.push_back(std::stoull(item));
            } catch (const std::exception&) {
                throw std::invalid_argument(origin_ + ": key " + key + " has a non-integer item: " + item);
            }
        }
        return out;
    }

    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) {
        if (!has(key)) return fallback;
        std::vector<int> out;
        for (const auto& item : split(get_string(key, ""), ',')) {
            if (item.empty()) continue;
            try {
                out.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw std::invalid_argument(origin_ + ": key " + key + " has a non-integer item: " + item);
            }
        }
        return out;
    }

    /// "x:y, x:y" pair list.
    std::vector<std::pair<double, double>> get_pair_list(const std::string& key) {
        std::vector<std::pair<double, double>> out;
        if (!has(key)) return out;
        for (const auto& item : split(get_string(key, ""), ',')) {
            if (item.empty()) continue;
            const auto colon = item.find(':');
            if (colon == std::string::npos) {
                throw std::invalid_argument(origin_ + ": key " + key + " expects x:y pairs, got " + item);
            }
            out.emplace_back(parse_double(key, trim(item.substr(0, colon))),
                             parse_double(key, trim(item.substr(colon + 1))));
        }
        return out;
    }

    std::vector<std::string> sections_with_prefix(const std::string& prefix) const {
        std::set<std::string> names;
        for (const auto& [key, value] : values_) {
            if (key.rfind(prefix, 0) == 0) {
                const auto dot = key.find('.', prefix.size());
                if (dot != std::string::npos) names.insert(key.substr(0, dot));
            }
        }
        return {names.begin(), names.end()};
    }

    void reject_unconsumed() const {
        for (const auto& [key, value] : values_) {
            if (!consumed_.count(key)) throw std::invalid_argument(origin_ + ": unknown key " + key);
        }
    }

private:
    double parse_double(const std::string& key, const std::string& raw) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument(origin_ + ": key " + key + " is not a number: " + raw);
        }
    }

    void fail(int lineno, const std::string& message) const {
        throw std::invalid_argument(origin_ + ":" + std::to_string(lineno) + ": " + message);
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

inline MeanFn parse_mean(KeyValueFile& file, const std::string& section) {
    MeanFn mean;
    const std::string kind = file.get_string(section + ".mean", "constant");
    if (kind == "constant") {
        mean.kind = MeanKind::Constant;
        mean.value = file.get_double(section + ".value", 0.5);
    } else if (kind == "identity") {
        mean.kind = MeanKind::Identity;
    } else if (kind == "pwlinear") {
        mean.kind = MeanKind::PiecewiseLinear;
        mean.knots = file.get_pair_list(section + ".knots");
    } else {
        throw std::invalid_argument("config: unknown mean kind " + kind);
    }
    return mean;
}

inline NoiseSpec parse_noise(KeyValueFile& file, const std::string& section) {
    NoiseSpec noise;
    const std::string kind = file.get_string(section + ".noise", "bernoulli");
    if (kind == "bernoulli") {
        noise.kind = NoiseKind::Bernoulli;
    } else if (kind == "uniform") {
        noise.kind = NoiseKind::TruncatedUniform;
        noise.width = file.get_double(section + ".width", 0.0);
    } else {
        throw std::invalid_argument("config: unknown noise kind " + kind);
    }
    return noise;
}

}  // namespace detail

/// Parses an experiment description. See docs/config_format.md for the schema.
inline ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
    using detail::KeyValueFile;
    KeyValueFile file = KeyValueFile::parse(in, origin);
    ExperimentConfig cfg;

    const std::string env_kind = file.get_string("env.kind", "custom");
    if (env_kind == "lemma1") {
        cfg.environment = lemma1_env(file.get_double("env.x_fixed", 0.5), file.get_double("env.p_high", 0.8));
    } else if (env_kind == "custom") {
        EnvironmentSpec env;
        env.num_types = file.get_int("env.types", 0);
        env.declared_lipschitz = file.get_double("env.lipschitz", 1.0);
        const std::string arrival = file.get_string("env.arrival", "uniform");
        ArrivalSpec default_arrival;
        if (arrival == "uniform") {
            default_arrival.kind = ArrivalKind::Uniform;
        } else if (arrival == "worstcase") {
            default_arrival.kind = ArrivalKind::WorstCase;
            default_arrival.rho = file.get_double("env.worstcase_rho", 2.0);
        } else {
            throw std::invalid_argument("config: unknown arrival mode " + arrival);
        }
        env.arrivals.assign(static_cast<std::size_t>(std::max(0, env.num_types)), default_arrival);

        for (const auto& section : file.sections_with_prefix("env.action.")) {
            const int id = std::stoi(section.substr(std::string("env.action.").size()));
            if (id != static_cast<int>(env.actions.size())) {
                throw std::invalid_argument("config: action sections must be numbered 0,1,... contiguously");
            }
            ActionSpec action;
            for (int i : file.get_int_list(section + ".relevant", {})) action.relevant.push_back(i);
            action.mean = detail::parse_mean(file, section);
            action.noise = detail::parse_noise(file, section);
            env.actions.push_back(std::move(action));
        }
        for (const auto& section : file.sections_with_prefix("env.arrival.")) {
            const int type_id = std::stoi(section.substr(std::string("env.arrival.").size()));
            if (type_id < 1 || type_id > env.num_types) {
                throw std::invalid_argument("config: arrival override for unknown type " + std::to_string(type_id));
            }
            ArrivalSpec spec;
            spec.kind = ArrivalKind::Discrete;
            spec.atoms = file.get_pair_list(section + ".atoms");
            env.arrivals[static_cast<std::size_t>(type_id - 1)] = std::move(spec);
        }
        cfg.environment = std::move(env);
    } else {
        throw std::invalid_argument("config: unknown environment kind " + env_kind);
    }

    const std::string algorithm = file.get_string("algorithm.name", "releaf");
    if (algorithm == "releaf") {
        cfg.algorithm = AlgorithmKind::Releaf;
    } else if (algorithm == "greedy") {
        cfg.algorithm = AlgorithmKind::GreedyReleaf;
    } else if (algorithm == "epsgreedy") {
        cfg.algorithm = AlgorithmKind::EpsilonGreedy;
    } else {
        throw std::invalid_argument("config: unknown algorithm " + algorithm);
    }
    cfg.policy.gamma_rel = file.get_int("algorithm.gamma_rel", 1);
    cfg.policy.lipschitz = file.get_double("algorithm.lipschitz", 1.0);
    cfg.policy.rho = file.get_double("algorithm.rho", kBalancedRho);
    cfg.policy.confidence = file.get_double("algorithm.confidence", 0.1);
    cfg.policy.control_scale = file.get_double("algorithm.kappa", 1.0);
    cfg.policy.observe_cost = file.get_double("algorithm.observe_cost", 0.0);
    cfg.policy.initial_level = static_cast<unsigned>(file.get_u64("algorithm.initial_level", 0));
    cfg.policy.seed = file.get_u64("algorithm.seed", 0);
    const std::string feedback = file.get_string("algorithm.feedback", "explore_only");
    if (feedback == "explore_only") {
        cfg.policy.feedback = FeedbackMode::ExploreOnly;
    } else if (feedback == "all_steps") {
        cfg.policy.feedback = FeedbackMode::AllSteps;
    } else if (feedback == "full_observation") {
        cfg.policy.feedback = FeedbackMode::FullObservation;
    } else {
        throw std::invalid_argument("config: unknown feedback mode " + feedback);
    }
    cfg.eps_decay = file.get_double("algorithm.eps_decay", 1.0);
    cfg.eps_grid_level = static_cast<unsigned>(file.get_u64("algorithm.eps_grid_level", 2));

    cfg.horizon = file.get_u64("run.horizon", 1000);
    cfg.seeds = file.get_u64_list("run.seeds", {1});
    cfg.log_stride = file.get_u64("run.log_stride", 1);
    cfg.checkpoints = file.get_u64_list("run.checkpoints", {});
    cfg.output_dir = file.get_string("run.out", ".");
    cfg.stop_after_exploit_steps = file.get_u64("run.stop_after_exploit_steps", 0);

    file.reject_unconsumed();
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return parse_config(in, path);
}

}  // namespace releaf
