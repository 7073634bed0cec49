#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "releaf/baselines.hpp"
#include "releaf/csv.hpp"
#include "releaf/environment.hpp"
#include "releaf/policy.hpp"

namespace releaf {

enum class AlgorithmKind { Releaf, GreedyReleaf, EpsilonGreedy };

struct ExperimentConfig {
    EnvironmentSpec environment;
    AlgorithmKind algorithm = AlgorithmKind::Releaf;
    PolicyParams policy;       // num_types / num_actions are filled from the environment
    double eps_decay = 1.0;
    unsigned eps_grid_level = 2;
    std::uint64_t horizon = 1000;
    std::vector<std::uint64_t> seeds{1};
    std::uint64_t log_stride = 1;
    std::vector<std::uint64_t> checkpoints;
    std::string output_dir = ".";
    std::uint64_t stop_after_exploit_steps = 0;  // 0: run the full horizon

    void validate() {
        environment.validate();
        policy.num_types = environment.num_types;
        policy.num_actions = environment.num_actions();
        if (algorithm == AlgorithmKind::Releaf) {
            policy.validate();
        }
        if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
        if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
        if (log_stride < 1) throw std::invalid_argument("config: log_stride must be >= 1");
        for (std::uint64_t c : checkpoints) {
            if (c < 1 || c > horizon) throw std::invalid_argument("config: checkpoint outside [1, horizon]");
        }
    }
};

struct EpisodeSummary {
    std::uint64_t steps = 0;
    double total_regret = 0.0;
    double explore_regret = 0.0;
    double exploit_regret = 0.0;
    std::uint64_t exploration_steps = 0;
    std::uint64_t exploitation_steps = 0;
    double observation_cost = 0.0;
    std::uint64_t relevance_hits = 0;
    double relevance_hit_rate = 0.0;  // over exploitation steps; 0 when none occurred
    double max_exploit_inst_regret = 0.0;
    unsigned max_interval_level = 0;
};

struct Checkpoint {
    std::uint64_t t = 0;
    double cum_regret = 0.0;
    double cum_regret_exploit = 0.0;
};

struct EpisodeResult {
    std::vector<TrajectoryRow> rows;
    EpisodeSummary summary;
    std::vector<Checkpoint> checkpoints;
};

namespace detail {

inline bool tuple_contains(const TypeTuple& super, const TypeTuple& sub) {
    std::size_t j = 0;
    for (int i : super) {
        if (j < sub.size() && sub[j] == i) ++j;
    }
    return j == sub.size();
}

/// Drives one policy against one sampled environment for up to `horizon`
/// steps, producing the trajectory log, checkpoints, and the phase-decomposed
/// regret summary. Observation cost is charged whenever beta is 1 and
/// attributed to the phase of that step, so the accounting identity
/// total = explore + exploit holds exactly.
template <typename PolicyT, typename RewardPlan>
EpisodeResult run_policy_episode(const ExperimentConfig& cfg, PolicyT& policy, EnvironmentSampler& sampler,
                                 double observe_cost, RewardPlan&& rewards_for) {
    const auto& env = sampler.spec();
    const int num_actions = env.num_actions();
    EpisodeResult result;
    EpisodeSummary& summary = result.summary;
    double cum_explore = 0.0;
    double cum_exploit = 0.0;
    std::vector<std::uint64_t> checkpoints = cfg.checkpoints;
    std::sort(checkpoints.begin(), checkpoints.end());
    std::size_t next_checkpoint = 0;

    for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
        const std::vector<double> x = sampler.context(t);
        const Decision decision = policy.step(x);

        std::vector<std::optional<double>> rewards(static_cast<std::size_t>(num_actions));
        rewards_for(decision, x, rewards, sampler);

        const double gap = env.instantaneous_regret(x, decision.action);
        const double cost = decision.observe ? observe_cost : 0.0;
        bool rel_hit = false;
        if (decision.phase == Phase::Explore) {
            cum_explore += gap + cost;
            summary.exploration_steps += 1;
        } else {
            cum_exploit += gap + cost;
            summary.exploitation_steps += 1;
            summary.max_exploit_inst_regret = std::max(summary.max_exploit_inst_regret, gap);
            if (!decision.estimated_relevant.empty()) {
                const auto& truth = env.actions[static_cast<std::size_t>(decision.action)].relevant;
                rel_hit = tuple_contains(
                    decision.estimated_relevant[static_cast<std::size_t>(decision.action)], truth);
            }
            summary.relevance_hits += rel_hit ? 1 : 0;
        }
        if (decision.observe) summary.observation_cost += observe_cost;

        policy.ingest(decision, rewards);
        summary.steps = t;

        const bool done = t == cfg.horizon ||
                          (cfg.stop_after_exploit_steps > 0 &&
                           summary.exploitation_steps >= cfg.stop_after_exploit_steps);
        if (t % cfg.log_stride == 0 || done) {
            TrajectoryRow row;
            row.t = t;
            row.phase = decision.phase;
            row.action = decision.action;
            row.beta = decision.observe;
            if (decision.observe) row.reward_observed = rewards[static_cast<std::size_t>(decision.action)];
            row.inst_regret = gap;
            row.cum_regret_explore = cum_explore;
            row.cum_regret_exploit = cum_exploit;
            row.cum_regret = cum_explore + cum_exploit;
            row.rel_hit = rel_hit;
            row.max_interval_level = policy.max_interval_level();
            row.context = x;
            if (decision.phase == Phase::Exploit && !decision.estimated_relevant.empty()) {
                row.estimated_relevant =
                    decision.estimated_relevant[static_cast<std::size_t>(decision.action)];
            }
            result.rows.push_back(row);
        }
        while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == t) {
            result.checkpoints.push_back({t, cum_explore + cum_exploit, cum_exploit});
            ++next_checkpoint;
        }
        if (done) break;
    }

    summary.explore_regret = cum_explore;
    summary.exploit_regret = cum_exploit;
    summary.total_regret = cum_explore + cum_exploit;
    if (summary.exploitation_steps > 0) {
        summary.relevance_hit_rate =
            static_cast<double>(summary.relevance_hits) / static_cast<double>(summary.exploitation_steps);
    }
    summary.max_interval_level = policy.max_interval_level();
    return result;
}

}  // namespace detail

/// Runs one seeded episode of the configured algorithm. Environment and
/// policy randomness use independent streams derived from the episode seed,
/// so identical (config, seed) pairs reproduce byte-identical trajectories.
inline EpisodeResult run_episode(const ExperimentConfig& config, std::uint64_t seed) {
    ExperimentConfig cfg = config;
    cfg.validate();
    EnvironmentSampler sampler(cfg.environment, derive_seed(seed, 0xE11));

    switch (cfg.algorithm) {
        case AlgorithmKind::Releaf: {
            PolicyParams params = cfg.policy;
            params.seed = derive_seed(seed ^ cfg.policy.seed, 0xA11);
            ReleafPolicy policy(params);
            const FeedbackMode mode = params.feedback;
            auto plan = [mode](const Decision& d, const std::vector<double>& x,
                               std::vector<std::optional<double>>& rewards, EnvironmentSampler& s) {
                if (d.phase == Phase::Explore) {
                    if (mode == FeedbackMode::FullObservation) {
                        for (std::size_t a = 0; a < rewards.size(); ++a) {
                            rewards[a] = s.reward(static_cast<int>(a), x);
                        }
                    } else {
                        rewards[static_cast<std::size_t>(d.action)] = s.reward(d.action, x);
                    }
                } else if (mode == FeedbackMode::AllSteps) {
                    rewards[static_cast<std::size_t>(d.action)] = s.reward(d.action, x);
                }
            };
            return detail::run_policy_episode(cfg, policy, sampler, params.observe_cost, plan);
        }
        case AlgorithmKind::GreedyReleaf: {
            PolicyParams params = cfg.policy;
            params.seed = derive_seed(seed ^ cfg.policy.seed, 0xA22);
            GreedyReleafPolicy policy(params);
            auto plan = [](const Decision& d, const std::vector<double>& x,
                           std::vector<std::optional<double>>& rewards, EnvironmentSampler& s) {
                if (d.phase == Phase::Explore) {
                    rewards[static_cast<std::size_t>(d.action)] = s.reward(d.action, x);
                }
            };
            return detail::run_policy_episode(cfg, policy, sampler, params.observe_cost, plan);
        }
        case AlgorithmKind::EpsilonGreedy: {
            EpsGreedyParams params;
            params.num_types = cfg.environment.num_types;
            params.num_actions = cfg.environment.num_actions();
            params.decay = cfg.eps_decay;
            params.grid_level = cfg.eps_grid_level;
            params.observe_cost = cfg.policy.observe_cost;
            params.seed = derive_seed(seed ^ cfg.policy.seed, 0xA33);
            EpsilonGreedyPolicy policy(params);
            auto plan = [](const Decision& d, const std::vector<double>& x,
                           std::vector<std::optional<double>>& rewards, EnvironmentSampler& s) {
                rewards[static_cast<std::size_t>(d.action)] = s.reward(d.action, x);
            };
            return detail::run_policy_episode(cfg, policy, sampler, params.observe_cost, plan);
        }
    }
    throw std::logic_error("run_episode: unknown algorithm");
}

}  // namespace releaf
