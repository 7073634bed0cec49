#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "releaf/partition.hpp"
#include "releaf/rng.hpp"
#include "releaf/stats.hpp"

namespace releaf {

enum class MeanKind { Constant, Identity, PiecewiseLinear };

/// Expected-reward function of one action over its relevant coordinates.
/// Identity and PiecewiseLinear act on a single relevant coordinate.
struct MeanFn {
    MeanKind kind = MeanKind::Constant;
    double value = 0.5;                              // Constant
    std::vector<std::pair<double, double>> knots;    // PiecewiseLinear, (x, y) with x increasing

    double eval(const std::vector<double>& x_rel) const {
        switch (kind) {
            case MeanKind::Constant:
                return value;
            case MeanKind::Identity:
                return x_rel.at(0);
            case MeanKind::PiecewiseLinear: {
                const double x = x_rel.at(0);
                if (x <= knots.front().first) return knots.front().second;
                for (std::size_t k = 1; k < knots.size(); ++k) {
                    if (x <= knots[k].first) {
                        const auto& [x0, y0] = knots[k - 1];
                        const auto& [x1, y1] = knots[k];
                        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
                    }
                }
                return knots.back().second;
            }
        }
        return value;
    }

    double lipschitz() const {
        switch (kind) {
            case MeanKind::Constant:
                return 0.0;
            case MeanKind::Identity:
                return 1.0;
            case MeanKind::PiecewiseLinear: {
                double worst = 0.0;
                for (std::size_t k = 1; k < knots.size(); ++k) {
                    const double dx = knots[k].first - knots[k - 1].first;
                    const double dy = std::abs(knots[k].second - knots[k - 1].second);
                    worst = std::max(worst, dy / dx);
                }
                return worst;
            }
        }
        return 0.0;
    }

    int arity() const { return kind == MeanKind::Constant ? 0 : 1; }

    void validate() const {
        if (kind == MeanKind::Constant && !(value >= 0.0 && value <= 1.0)) {
            throw std::invalid_argument("mean: constant outside [0,1]");
        }
        if (kind == MeanKind::PiecewiseLinear) {
            if (knots.size() < 2) throw std::invalid_argument("mean: piecewise-linear needs >= 2 knots");
            for (std::size_t k = 0; k < knots.size(); ++k) {
                if (!(knots[k].second >= 0.0 && knots[k].second <= 1.0)) {
                    throw std::invalid_argument("mean: knot value outside [0,1]");
                }
                if (k > 0 && !(knots[k].first > knots[k - 1].first)) {
                    throw std::invalid_argument("mean: knot positions must increase");
                }
            }
        }
    }
};

enum class NoiseKind { Bernoulli, TruncatedUniform };

/// Reward noise with the declared mean and support inside [0,1].
/// TruncatedUniform shrinks its half-width near the boundary so the mean is
/// exact; width 0 yields the mean deterministically.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::Bernoulli;
    double width = 0.0;

    double sample(double mean, Rng& rng) const {
        if (kind == NoiseKind::Bernoulli) return rng.bernoulli(mean) ? 1.0 : 0.0;
        const double h = std::min({width / 2.0, mean, 1.0 - mean});
        if (h <= 0.0) return mean;
        return mean + (2.0 * rng.uniform01() - 1.0) * h;
    }
};

enum class ArrivalKind { Uniform, Discrete, WorstCase };

struct ArrivalSpec {
    ArrivalKind kind = ArrivalKind::Uniform;
    std::vector<std::pair<double, double>> atoms;  // Discrete: (value, probability)
    double rho = 2.0;                              // WorstCase fill parameter

    void validate() const {
        if (kind == ArrivalKind::Discrete) {
            if (atoms.empty()) throw std::invalid_argument("arrival: discrete mode needs atoms");
            double total = 0.0;
            for (const auto& [v, p] : atoms) {
                if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("arrival: atom outside [0,1]");
                if (!(p >= 0.0)) throw std::invalid_argument("arrival: negative atom probability");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("arrival: atom probabilities must sum to 1");
        }
        if (kind == ArrivalKind::WorstCase && !(rho > 0.0)) {
            throw std::invalid_argument("arrival: worst-case rho must be positive");
        }
    }
};

struct ActionSpec {
    TypeTuple relevant;  // sorted type ids the action's reward depends on
    MeanFn mean;
    NoiseSpec noise;
};

/// Context, per-action expected rewards and the oracle's choice for one step.
struct StepOutcome {
    std::vector<double> context;
    std::vector<double> means;
    int optimal_action = 0;
    double optimal_mean = 0.0;
};

/// Synthetic environment with a known relevance relation. Ground truth
/// (relevant tuples and expected rewards) is visible to the harness only.
struct EnvironmentSpec {
    int num_types = 0;
    double declared_lipschitz = 1.0;
    std::vector<ActionSpec> actions;
    std::vector<ArrivalSpec> arrivals;  // one per type

    int num_actions() const { return static_cast<int>(actions.size()); }

    int relevance_dimension() const {
        std::size_t d_rel = 0;
        for (const auto& a : actions) d_rel = std::max(d_rel, a.relevant.size());
        return static_cast<int>(d_rel);
    }

    void validate() const {
        if (num_types < 1) throw std::invalid_argument("environment: num_types must be positive");
        if (actions.empty()) throw std::invalid_argument("environment: needs at least one action");
        if (static_cast<int>(arrivals.size()) != num_types) {
            throw std::invalid_argument("environment: one arrival spec per type required");
        }
        for (const auto& arrival : arrivals) arrival.validate();
        for (const auto& action : actions) {
            action.mean.validate();
            // Constant means ignore their coordinates and admit any declared
            // relevant tuple; coordinate-based means act on exactly one type.
            if (action.mean.arity() == 1 && action.relevant.size() != 1) {
                throw std::invalid_argument("environment: relevant tuple does not match mean function arity");
            }
            for (std::size_t k = 0; k < action.relevant.size(); ++k) {
                if (action.relevant[k] < 1 || action.relevant[k] > num_types) {
                    throw std::invalid_argument("environment: relevant type id out of range");
                }
                if (k > 0 && action.relevant[k] <= action.relevant[k - 1]) {
                    throw std::invalid_argument("environment: relevant tuple must be sorted and distinct");
                }
            }
            if (action.mean.lipschitz() > declared_lipschitz + 1e-12) {
                throw std::invalid_argument("environment: mean function exceeds declared Lipschitz constant");
            }
        }
    }

    double mean_reward(int action, const std::vector<double>& x) const {
        const auto& spec = actions.at(static_cast<std::size_t>(action));
        std::vector<double> x_rel;
        x_rel.reserve(spec.relevant.size());
        for (int i : spec.relevant) x_rel.push_back(x.at(static_cast<std::size_t>(i - 1)));
        return spec.mean.eval(x_rel);
    }

    StepOutcome outcome(const std::vector<double>& x) const {
        StepOutcome out;
        out.context = x;
        out.means.resize(actions.size());
        for (std::size_t a = 0; a < actions.size(); ++a) out.means[a] = mean_reward(static_cast<int>(a), x);
        out.optimal_action = 0;
        out.optimal_mean = out.means[0];
        for (std::size_t a = 1; a < actions.size(); ++a) {
            if (out.means[a] > out.optimal_mean) {
                out.optimal_mean = out.means[a];
                out.optimal_action = static_cast<int>(a);
            }
        }
        return out;
    }

    int optimal_action(const std::vector<double>& x) const { return outcome(x).optimal_action; }

    double instantaneous_regret(const std::vector<double>& x, int action) const {
        const auto o = outcome(x);
        return o.optimal_mean - o.means.at(static_cast<std::size_t>(action));
    }

    /// Largest |mean gap| / |relevant coordinate gap| over sampled point pairs.
    double max_lipschitz_ratio(Rng& rng, int samples) const {
        double worst = 0.0;
        std::vector<double> x(static_cast<std::size_t>(num_types));
        std::vector<double> y(static_cast<std::size_t>(num_types));
        for (int n = 0; n < samples; ++n) {
            for (auto& v : x) v = rng.uniform01();
            y = x;
            for (std::size_t a = 0; a < actions.size(); ++a) {
                for (int i : actions[a].relevant) y[static_cast<std::size_t>(i - 1)] = rng.uniform01();
                double dist2 = 0.0;
                for (int i : actions[a].relevant) {
                    const double d = y[static_cast<std::size_t>(i - 1)] - x[static_cast<std::size_t>(i - 1)];
                    dist2 += d * d;
                }
                const double dist = std::sqrt(dist2);
                if (dist > 1e-12) {
                    const double gap =
                        std::abs(mean_reward(static_cast<int>(a), y) - mean_reward(static_cast<int>(a), x));
                    worst = std::max(worst, gap / dist);
                }
                for (int i : actions[a].relevant) y[static_cast<std::size_t>(i - 1)] = x[static_cast<std::size_t>(i - 1)];
            }
        }
        return worst;
    }
};

/// Two-action, two-type environment on which marginal (per-type) reward
/// estimates provably mislead a greedy learner: action 0 pays 0.5 regardless,
/// action 1 pays the second coordinate, the first coordinate never moves.
inline EnvironmentSpec lemma1_env(double x_fixed = 0.5, double p_high = 0.8) {
    if (!(p_high >= 0.0 && p_high <= 1.0)) throw std::domain_error("lemma1_env: p_high outside [0,1]");
    if (!(x_fixed >= 0.0 && x_fixed <= 1.0)) throw std::domain_error("lemma1_env: x_fixed outside [0,1]");
    EnvironmentSpec env;
    env.num_types = 2;
    env.declared_lipschitz = 1.0;
    ActionSpec a;
    a.relevant = {1};
    a.mean = MeanFn{MeanKind::Constant, 0.5, {}};
    a.noise = NoiseSpec{NoiseKind::Bernoulli, 0.0};
    ActionSpec b;
    b.relevant = {2};
    b.mean = MeanFn{MeanKind::Identity, 0.0, {}};
    b.noise = NoiseSpec{NoiseKind::Bernoulli, 0.0};
    env.actions = {a, b};
    env.arrivals.resize(2);
    env.arrivals[0] = ArrivalSpec{ArrivalKind::Discrete, {{x_fixed, 1.0}}, 2.0};
    env.arrivals[1] = ArrivalSpec{ArrivalKind::Discrete, {{0.0, 1.0 - p_high}, {1.0, p_high}}, 2.0};
    env.validate();
    return env;
}

/// Deterministic arrival schedule that keeps active intervals as long as
/// possible: emits the centers of all level-l intervals, each exactly
/// ceil(2^(rho*l)) times, before any level-(l+1) center.
class WorstCaseArrival {
public:
    explicit WorstCaseArrival(double rho) : rho_(rho) {}

    double next() {
        const double value = Interval{level_, index_}.center();
        if (++emitted_ >= quota()) {
            emitted_ = 0;
            if (++index_ == (std::uint64_t{1} << level_)) {
                index_ = 0;
                ++level_;
            }
        }
        return value;
    }

private:
    std::uint64_t quota() const {
        return static_cast<std::uint64_t>(std::ceil(std::exp2(rho_ * static_cast<double>(level_))));
    }
    double rho_;
    std::uint32_t level_ = 0;
    std::uint64_t index_ = 0;
    std::uint64_t emitted_ = 0;
};

/// Per-episode sampling state over an immutable EnvironmentSpec.
class EnvironmentSampler {
public:
    EnvironmentSampler(EnvironmentSpec spec, std::uint64_t seed)
        : spec_(std::move(spec)), rng_(derive_seed(seed, 0x656E76)) {
        spec_.validate();
        for (const auto& arrival : spec_.arrivals) {
            worst_case_.emplace_back(arrival.kind == ArrivalKind::WorstCase ? arrival.rho : 0.0);
        }
    }

    const EnvironmentSpec& spec() const { return spec_; }

    std::vector<double> context(std::uint64_t t) {
        if (t < 1) throw std::invalid_argument("context: time index is 1-based");
        std::vector<double> x(static_cast<std::size_t>(spec_.num_types));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto& arrival = spec_.arrivals[i];
            switch (arrival.kind) {
                case ArrivalKind::Uniform:
                    x[i] = rng_.uniform01();
                    break;
                case ArrivalKind::Discrete: {
                    double u = rng_.uniform01();
                    x[i] = arrival.atoms.back().first;
                    for (const auto& [value, prob] : arrival.atoms) {
                        if (u < prob) {
                            x[i] = value;
                            break;
                        }
                        u -= prob;
                    }
                    break;
                }
                case ArrivalKind::WorstCase:
                    x[i] = worst_case_[i].next();
                    break;
            }
        }
        return x;
    }

    double reward(int action, const std::vector<double>& x) {
        for (double v : x) {
            if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("reward: context outside [0,1]^D");
        }
        return spec_.actions.at(static_cast<std::size_t>(action)).noise.sample(spec_.mean_reward(action, x), rng_);
    }

private:
    EnvironmentSpec spec_;
    Rng rng_;
    std::vector<WorstCaseArrival> worst_case_;
};

}  // namespace releaf
