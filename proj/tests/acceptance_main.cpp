// Acceptance suite: one quantitative criterion per line, every tolerance
// pinned in code. Run with no arguments for the full suite, or pass criterion
// numbers to run a subset. Exit code 0 iff every executed criterion passes.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "releaf/bounds.hpp"
#include "releaf/episode.hpp"
#include "replay_check.hpp"

using namespace releaf;
using releaf::testing::LoggedStep;
using releaf::testing::random_small_env;
using releaf::testing::replay_compare_episode;
using releaf::testing::ReplayOracle;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::uint64_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::uint64_t k = 0; k < count; ++k) seeds[k] = first + k;
    return seeds;
}

EnvironmentSpec identity_vs_constant_env(int num_types) {
    EnvironmentSpec env;
    env.num_types = num_types;
    ActionSpec a0;
    a0.relevant = {1};
    a0.mean = MeanFn{MeanKind::Identity, 0.0, {}};
    a0.noise = NoiseSpec{NoiseKind::Bernoulli, 0.0};
    ActionSpec a1;
    a1.mean = MeanFn{MeanKind::Constant, 0.5, {}};
    a1.noise = NoiseSpec{NoiseKind::Bernoulli, 0.0};
    env.actions = {a0, a1};
    env.arrivals.assign(static_cast<std::size_t>(num_types), ArrivalSpec{});
    return env;
}

EnvironmentSpec two_atom_env() {
    EnvironmentSpec env = identity_vs_constant_env(3);
    env.arrivals[0] = ArrivalSpec{ArrivalKind::Discrete, {{0.15, 0.5}, {0.95, 0.5}}, 2.0};
    env.arrivals[1] = ArrivalSpec{ArrivalKind::Discrete, {{0.5, 1.0}}, 2.0};
    env.arrivals[2] = ArrivalSpec{ArrivalKind::Discrete, {{0.5, 1.0}}, 2.0};
    return env;
}

// 1. Separation on the marginal-estimate counterexample: the tuple-based
//    policy converges while the greedy marginal policy keeps paying.
Outcome criterion1() {
    const auto started = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.environment = lemma1_env(0.5, 0.8);
    cfg.policy.gamma_rel = 1;
    cfg.policy.lipschitz = 1.0;
    cfg.policy.rho = kBalancedRho;
    cfg.policy.confidence = 0.1;
    cfg.policy.control_scale = 50.0;  // tuned so both policies exploit most steps
    cfg.horizon = 50000;
    cfg.log_stride = cfg.horizon;
    cfg.checkpoints = {40000, 50000};
    const auto seeds = seed_range(1, 10);

    double greedy_rate_sum = 0.0, releaf_tail_sum = 0.0;
    double min_exploit_fraction = 1.0;
    for (auto seed : seeds) {
        cfg.algorithm = AlgorithmKind::Releaf;
        const auto releaf_run = run_episode(cfg, seed);
        cfg.algorithm = AlgorithmKind::GreedyReleaf;
        const auto greedy_run = run_episode(cfg, seed);

        releaf_tail_sum += (releaf_run.checkpoints[1].cum_regret - releaf_run.checkpoints[0].cum_regret) /
                           10000.0;
        greedy_rate_sum += greedy_run.summary.total_regret / static_cast<double>(cfg.horizon);
        min_exploit_fraction = std::min(
            min_exploit_fraction, static_cast<double>(releaf_run.summary.exploitation_steps) / cfg.horizon);
        min_exploit_fraction = std::min(
            min_exploit_fraction, static_cast<double>(greedy_run.summary.exploitation_steps) / cfg.horizon);
    }
    const double greedy_rate = greedy_rate_sum / static_cast<double>(seeds.size());
    const double releaf_tail = releaf_tail_sum / static_cast<double>(seeds.size());
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    Outcome out;
    out.pass = greedy_rate >= 0.02 && releaf_tail <= 0.01 && min_exploit_fraction >= 0.5 &&
               elapsed <= 60.0;
    std::ostringstream os;
    os << "greedy regret/step " << greedy_rate << " (need >= 0.02), tuple-policy tail regret/step "
       << releaf_tail << " (need <= 0.01), min exploit fraction " << min_exploit_fraction
       << " (need >= 0.5), " << elapsed << "s (need <= 60s)";
    out.detail = os.str();
    return out;
}

// 2. Sublinear exploitation regret at the balanced duration parameter.
Outcome criterion2() {
    const auto started = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.environment = identity_vs_constant_env(3);
    cfg.algorithm = AlgorithmKind::Releaf;
    cfg.policy.gamma_rel = 1;
    cfg.policy.lipschitz = 1.0;
    cfg.policy.rho = kBalancedRho;
    cfg.policy.confidence = 0.1;
    cfg.policy.control_scale = 100.0;
    cfg.horizon = 100000;
    cfg.log_stride = cfg.horizon;
    cfg.checkpoints = {1000, 10000, 100000};
    const auto seeds = seed_range(1, 10);

    std::vector<double> mean_exploit(3, 0.0);
    for (auto seed : seeds) {
        const auto result = run_episode(cfg, seed);
        for (std::size_t k = 0; k < 3; ++k) {
            mean_exploit[k] += result.checkpoints[k].cum_regret_exploit / static_cast<double>(seeds.size());
        }
    }
    std::vector<std::pair<double, double>> points;
    for (std::size_t k = 0; k < 3; ++k) {
        points.emplace_back(static_cast<double>(cfg.checkpoints[k]), mean_exploit[k]);
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Outcome out;
    std::ostringstream os;
    try {
        const double slope = slope_fit(points);
        out.pass = slope <= 0.93 && elapsed <= 300.0;
        os << "exploitation regret slope " << slope << " (need <= 0.93; order exponent "
           << kBalancedRho / (1.0 + kBalancedRho) << "), " << elapsed << "s (need <= 300s)";
    } catch (const std::domain_error& e) {
        out.pass = false;
        os << "slope undefined: " << e.what();
    }
    out.detail = os.str();
    return out;
}

// 3. Closed-form bound conformance with unscaled control numbers.
Outcome criterion3() {
    ExperimentConfig cfg;
    cfg.environment = two_atom_env();
    cfg.algorithm = AlgorithmKind::Releaf;
    cfg.policy.gamma_rel = 1;
    cfg.policy.lipschitz = 1.0;
    cfg.policy.rho = 5.0;
    cfg.policy.confidence = 0.1;
    cfg.policy.control_scale = 1.0;
    cfg.horizon = 10000;
    cfg.log_stride = cfg.horizon;
    cfg.validate();

    const auto bounds = theoretical_bounds(cfg.policy, static_cast<double>(cfg.horizon));
    Outcome out;
    out.pass = bounds.applicable;
    double worst_exploit = 0.0, worst_count = 0.0;
    for (auto seed : seed_range(1, 5)) {
        const auto result = run_episode(cfg, seed);
        worst_exploit = std::max(worst_exploit, result.summary.exploit_regret);
        worst_count = std::max(worst_count, static_cast<double>(result.summary.exploration_steps));
        out.pass = out.pass && result.summary.exploit_regret <= bounds.exploit_regret &&
                   static_cast<double>(result.summary.exploration_steps) <= bounds.exploration_count;
    }
    std::ostringstream os;
    os << "max exploitation regret " << worst_exploit << " <= " << bounds.exploit_regret
       << ", max exploration count " << worst_count << " <= " << bounds.exploration_count;
    out.detail = os.str();
    return out;
}

// 4. Epsilon-optimal exploitation via deeper initial partitions.
Outcome criterion4() {
    const double epsilon = 0.3;
    const unsigned l_min = epsilon_initial_level(1.0, epsilon);
    ExperimentConfig cfg;
    cfg.environment = two_atom_env();
    cfg.algorithm = AlgorithmKind::Releaf;
    cfg.policy.gamma_rel = 1;
    cfg.policy.lipschitz = 1.0;
    cfg.policy.rho = kBalancedRho;
    cfg.policy.confidence = 0.1;
    cfg.policy.control_scale = 1.0;
    cfg.policy.initial_level = l_min;
    cfg.horizon = 1000000;
    cfg.log_stride = cfg.horizon;
    cfg.stop_after_exploit_steps = 200;

    const auto seeds = seed_range(1, 20);
    int violating_seeds = 0;
    std::uint64_t min_exploits = cfg.horizon;
    for (auto seed : seeds) {
        const auto result = run_episode(cfg, seed);
        min_exploits = std::min(min_exploits, result.summary.exploitation_steps);
        if (result.summary.max_exploit_inst_regret > epsilon) ++violating_seeds;
    }
    const double fraction = static_cast<double>(violating_seeds) / static_cast<double>(seeds.size());
    Outcome out;
    out.pass = l_min == 3 && min_exploits >= 200 && fraction <= 0.2;
    std::ostringstream os;
    os << "initial level " << l_min << " (need 3), min exploitation steps " << min_exploits
       << " (need >= 200), violating-seed fraction " << fraction << " (need <= 0.2)";
    out.detail = os.str();
    return out;
}

// 5. Relevance identification on a well-separated noiseless environment.
Outcome criterion5() {
    EnvironmentSpec env;
    env.num_types = 4;
    for (int type = 1; type <= 2; ++type) {
        ActionSpec a;
        a.relevant = {type};
        a.mean = MeanFn{MeanKind::Identity, 0.0, {}};
        a.noise = NoiseSpec{NoiseKind::TruncatedUniform, 0.0};
        env.actions.push_back(std::move(a));
    }
    env.arrivals.assign(4, ArrivalSpec{});

    ExperimentConfig cfg;
    cfg.environment = env;
    cfg.algorithm = AlgorithmKind::Releaf;
    cfg.policy.gamma_rel = 1;
    cfg.policy.lipschitz = 1.0;
    cfg.policy.rho = kBalancedRho;
    cfg.policy.confidence = 0.1;
    cfg.policy.control_scale = 100.0;
    cfg.horizon = 50000;
    cfg.log_stride = 1;

    double min_rate = 1.0;
    for (auto seed : seed_range(1, 3)) {
        const auto result = run_episode(cfg, seed);
        std::uint64_t exploit_rows = 0, hits = 0;
        for (const auto& row : result.rows) {
            if (row.t <= 10000 || row.phase != Phase::Exploit) continue;
            ++exploit_rows;
            hits += row.rel_hit ? 1 : 0;
        }
        if (exploit_rows == 0) {
            return {false, "no exploitation steps after step 10000"};
        }
        min_rate = std::min(min_rate, static_cast<double>(hits) / static_cast<double>(exploit_rows));
    }
    Outcome out;
    out.pass = min_rate >= 0.80;
    std::ostringstream os;
    os << "min identification rate after step 10^4 over 3 seeds: " << min_rate << " (need >= 0.80)";
    out.detail = os.str();
    return out;
}

// 6. Exact replay-oracle equivalence over 50 random small configurations.
Outcome criterion6() {
    Rng rng(0xACCE97);
    for (int config = 0; config < 50; ++config) {
        const auto env = random_small_env(rng);
        auto params = releaf::testing::random_small_params(rng);
        params.gamma_rel = 1;
        const std::uint64_t horizon = 200 + rng.bounded(801);  // up to 1000
        const auto mismatch = replay_compare_episode(params, env, horizon, rng.next());
        if (mismatch) {
            std::ostringstream os;
            os << "config " << config << " diverged: " << *mismatch;
            return {false, os.str()};
        }
    }
    return {true, "50 random configs replayed exactly (every step, bitwise means)"};
}

// 7. Randomized invariant suite, at least 1000 cases per invariant.
Outcome criterion7() {
    const auto started = std::chrono::steady_clock::now();
    std::ostringstream os;
    Rng rng(0x1147);

    // partition cover and split exactness, 1000 random partitions
    for (int trial = 0; trial < 1000; ++trial) {
        const double rho = 1.0 + 3.0 * rng.uniform01();
        TypePartition part(1, static_cast<unsigned>(rng.bounded(3)));
        const std::uint64_t arrivals = 50 + rng.bounded(150);
        for (std::uint64_t n = 0; n < arrivals; ++n) {
            const double x = rng.uniform01();
            const Interval p = part.locate(x);
            if (!p.contains(x)) return {false, "cover: located interval does not contain the point"};
            const std::uint64_t before = part.count(p);
            const bool split = part.record_arrival(p, rho).has_value();
            const bool expected =
                static_cast<double>(before + 1) >= std::exp2(rho * static_cast<double>(p.level));
            if (split != expected) return {false, "split exactness violated"};
        }
        const auto cells = part.snapshot();
        double total = 0.0;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            total += cells[k].first.length();
            if (k > 0 && cells[k].first.lower() != cells[k - 1].first.upper()) {
                return {false, "cover: gap or overlap between adjacent intervals"};
            }
        }
        if (std::abs(total - 1.0) > 1e-9) return {false, "cover: lengths do not sum to one"};
    }

    // count conservation: every live tuple cell equals its log recomputation
    std::uint64_t conservation_cases = 0;
    for (int episode = 0; episode < 12; ++episode) {
        const auto env = random_small_env(rng);
        PolicyParams params = releaf::testing::random_small_params(rng);
        params.num_types = env.num_types;
        params.num_actions = env.num_actions();
        params.seed = rng.next();
        ReleafPolicy policy(params);
        ReplayOracle oracle(params);
        EnvironmentSampler sampler(env, rng.next());
        for (std::uint64_t t = 1; t <= 220; ++t) {
            const auto x = sampler.context(t);
            StepTrace trace;
            const auto d = policy.step(x, &trace);
            const auto stats = oracle.recompute_stats(oracle.derive(x).located);
            const auto& tuples = oracle.tuples_2g();
            for (std::size_t w = 0; w < tuples.size(); ++w) {
                std::vector<Interval> ivs;
                for (int i : tuples[w]) ivs.push_back(trace.located[static_cast<std::size_t>(i - 1)]);
                const TupleKey key{tuples[w], ivs};
                for (int a = 0; a < params.num_actions; ++a) {
                    ++conservation_cases;
                    if (policy.stats().get(key, a).count != stats[w][static_cast<std::size_t>(a)].count) {
                        return {false, "count conservation violated"};
                    }
                }
            }
            LoggedStep entry;
            entry.context = x;
            entry.action = d.action;
            entry.beta = d.observe;
            entry.rewards.resize(static_cast<std::size_t>(params.num_actions));
            if (d.observe) {
                if (params.feedback == FeedbackMode::FullObservation && d.phase == Phase::Explore) {
                    for (int a = 0; a < params.num_actions; ++a) {
                        entry.rewards[static_cast<std::size_t>(a)] = sampler.reward(a, x);
                    }
                } else {
                    entry.rewards[static_cast<std::size_t>(d.action)] = sampler.reward(d.action, x);
                }
            }
            policy.ingest(d, entry.rewards);
            oracle.ingest(entry);
        }
    }

    // determinism and the regret accounting identity over 1000 paired episodes
    std::uint64_t accounting_rows = 0;
    for (int episode = 0; episode < 1000; ++episode) {
        ExperimentConfig cfg;
        cfg.environment = episode % 2 ? identity_vs_constant_env(3) : lemma1_env(0.5, 0.8);
        cfg.algorithm = AlgorithmKind::Releaf;
        cfg.policy.rho = kBalancedRho;
        cfg.policy.control_scale = 20.0;
        cfg.policy.observe_cost = episode % 3 ? 0.0 : 0.1;
        cfg.horizon = 60;
        cfg.log_stride = 1;
        const std::uint64_t seed = rng.next();
        const auto a = run_episode(cfg, seed);
        const auto b = run_episode(cfg, seed);
        if (a.rows.size() != b.rows.size()) return {false, "determinism: row counts differ"};
        for (std::size_t k = 0; k < a.rows.size(); ++k) {
            ++accounting_rows;
            if (a.rows[k].action != b.rows[k].action || a.rows[k].cum_regret != b.rows[k].cum_regret) {
                return {false, "determinism: trajectories differ"};
            }
            if (a.rows[k].cum_regret != a.rows[k].cum_regret_explore + a.rows[k].cum_regret_exploit) {
                return {false, "accounting identity violated"};
            }
        }
        if (a.summary.total_regret != a.summary.explore_regret + a.summary.exploit_regret) {
            return {false, "summary accounting identity violated"};
        }
    }

    // Lipschitz audit: 1000 random environments, sampled coordinate pairs
    for (int trial = 0; trial < 1000; ++trial) {
        const auto env = random_small_env(rng);
        Rng audit_rng(rng.next());
        if (env.max_lipschitz_ratio(audit_rng, 12) > env.declared_lipschitz + 1e-9) {
            return {false, "Lipschitz audit failed"};
        }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Outcome out;
    out.pass = elapsed <= 120.0;
    os << "1000 partition cases, " << conservation_cases << " conservation cases, 1000 determinism"
       << " episodes (" << accounting_rows << " accounting rows), 1000 audited environments in "
       << elapsed << "s (need <= 120s)";
    out.detail = os.str();
    return out;
}

// 8. The regret-order exponent formula at one relevant dimension.
Outcome criterion8() {
    const double g1 = relevance_exponent(1);
    const double target = 2.0 / (1.0 + std::numbers::sqrt2);
    Outcome out;
    out.pass = std::abs(g1 - target) < 1e-12;
    std::ostringstream os;
    os << "g(1) = " << g1 << ", |g(1) - 2/(1+sqrt 2)| = " << std::abs(g1 - target) << " (need < 1e-12)";
    out.detail = os.str();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"counterexample separation", criterion1},
        {"sublinear exploitation regret", criterion2},
        {"closed-form bound conformance", criterion3},
        {"epsilon-optimal exploitation", criterion4},
        {"relevance identification", criterion5},
        {"replay oracle equivalence", criterion6},
        {"randomized invariant suite", criterion7},
        {"regret exponent formula", criterion8},
    };

    std::set<std::size_t> selected;
    for (int k = 1; k < argc; ++k) selected.insert(static_cast<std::size_t>(std::stoul(argv[k])));

    bool all_pass = true;
    for (std::size_t n = 0; n < criteria.size(); ++n) {
        if (!selected.empty() && !selected.count(n + 1)) continue;
        Outcome outcome;
        try {
            outcome = criteria[n].second();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        all_pass = all_pass && outcome.pass;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << n + 1 << " ("
                  << criteria[n].first << "): " << outcome.detail << std::endl;
    }
    return all_pass ? 0 : 1;
}
