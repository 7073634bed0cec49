#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "releaf/partition.hpp"
#include "releaf/policy.hpp"
#include "releaf/rng.hpp"
#include "releaf/stats.hpp"

namespace releaf {

/// Greedy variant that keeps only marginal (per-type) sample means. It
/// explores under the same control numbers, applied to marginal counters, and
/// exploits the single highest marginal mean over all (action, type) pairs.
/// Marginal estimates mix the values of the other types' contexts, which is
/// exactly the failure the tuple-based policy avoids.
class GreedyReleafPolicy {
public:
    explicit GreedyReleafPolicy(const PolicyParams& params)
        : params_(params), rng_(derive_seed(params.seed, 0x677264)) {
        if (params_.num_types < 1) throw std::invalid_argument("params: num_types must be positive");
        if (params_.num_actions < 1) throw std::invalid_argument("params: num_actions must be positive");
        if (!(params_.lipschitz > 0.0)) throw std::invalid_argument("params: lipschitz must be positive");
        if (!(params_.rho > 0.0)) throw std::invalid_argument("params: rho must be positive");
        if (!(params_.confidence > 0.0 && params_.confidence < 1.0)) {
            throw std::invalid_argument("params: confidence must be in (0,1)");
        }
        if (!(params_.control_scale > 0.0)) throw std::invalid_argument("params: control_scale must be positive");
        partitions_.reserve(static_cast<std::size_t>(params_.num_types));
        for (int i = 1; i <= params_.num_types; ++i) partitions_.emplace_back(i, params_.initial_level);
    }

    const PolicyParams& params() const { return params_; }
    std::uint64_t time() const { return t_; }
    const StatsStore& stats() const { return store_; }
    StatsStore& stats() { return store_; }

    const TypePartition& partition(int type_id) const {
        return partitions_.at(static_cast<std::size_t>(type_id - 1));
    }

    unsigned max_interval_level() const {
        unsigned m = 0;
        for (const auto& part : partitions_) m = std::max(m, part.max_level());
        return m;
    }

    double control_number(std::uint64_t t, double interval_length) const {
        const double cardinality = static_cast<double>(t) *
                                   static_cast<double>(std::max<std::uint64_t>(1, params_.num_types - 1)) *
                                   static_cast<double>(params_.num_actions) / params_.confidence;
        const double raw = 2.0 * std::log(cardinality) /
                           ((params_.lipschitz * interval_length) * (params_.lipschitz * interval_length));
        return std::max(1.0, raw / params_.control_scale);
    }

    std::vector<int> underexplored(const std::vector<Interval>& located) const {
        std::vector<int> out;
        for (int a = 0; a < params_.num_actions; ++a) {
            for (int i = 1; i <= params_.num_types; ++i) {
                const Interval& p = located[static_cast<std::size_t>(i - 1)];
                if (static_cast<double>(store_.get(marginal_key(i, p), a).count) < control_number(t_, p.length())) {
                    out.push_back(a);
                    break;
                }
            }
        }
        return out;
    }

    Decision step(const std::vector<double>& context, StepTrace* trace = nullptr) {
        if (awaiting_ingest_) throw std::logic_error("step: previous decision not ingested");
        if (static_cast<int>(context.size()) != params_.num_types) {
            throw std::domain_error("step: context dimension mismatch");
        }
        std::vector<Interval> located(context.size());
        for (std::size_t i = 0; i < context.size(); ++i) located[i] = partitions_[i].locate(context[i]);

        Decision decision;
        const auto under = underexplored(located);
        if (!under.empty()) {
            decision.phase = Phase::Explore;
            decision.action = under[static_cast<std::size_t>(rng_.bounded(under.size()))];
            decision.observe = true;
        } else {
            decision.phase = Phase::Exploit;
            decision.observe = false;
            int best = 0;
            double best_mean = -1.0;
            for (int a = 0; a < params_.num_actions; ++a) {
                for (int i = 1; i <= params_.num_types; ++i) {
                    const double m =
                        store_.get(marginal_key(i, located[static_cast<std::size_t>(i - 1)]), a).mean;
                    if (m > best_mean) {
                        best_mean = m;
                        best = a;
                    }
                }
            }
            decision.action = best;
        }
        if (trace) {
            trace->located = located;
            trace->underexplored = under;
        }
        pending_located_ = std::move(located);
        awaiting_ingest_ = true;
        pending_phase_ = decision.phase;
        return decision;
    }

    /// Explore steps update the D marginal cells of the chosen action.
    void ingest(const Decision& decision, const std::vector<std::optional<double>>& rewards) {
        if (!awaiting_ingest_) throw std::logic_error("ingest: no pending decision");
        if (static_cast<int>(rewards.size()) != params_.num_actions) {
            throw std::logic_error("ingest: rewards size mismatch");
        }
        for (int a = 0; a < params_.num_actions; ++a) {
            const bool required = decision.phase == Phase::Explore && a == decision.action;
            if (rewards[static_cast<std::size_t>(a)].has_value() != required) {
                throw std::logic_error(required ? "ingest: missing required reward"
                                                : "ingest: unexpected reward supplied");
            }
        }
        if (decision.phase == Phase::Explore) {
            const double r = *rewards[static_cast<std::size_t>(decision.action)];
            for (int i = 1; i <= params_.num_types; ++i) {
                store_.update(marginal_key(i, pending_located_[static_cast<std::size_t>(i - 1)]), decision.action, r);
            }
        }
        for (int i = 1; i <= params_.num_types; ++i) {
            const Interval old = pending_located_[static_cast<std::size_t>(i - 1)];
            if (partitions_[static_cast<std::size_t>(i - 1)].record_arrival(old, params_.rho)) {
                store_.prune_on_split(i, old);
            }
        }
        ++t_;
        awaiting_ingest_ = false;
    }

private:
    static TupleKey marginal_key(int type_id, const Interval& p) { return TupleKey{{type_id}, {p}}; }

    PolicyParams params_;
    std::vector<TypePartition> partitions_;
    StatsStore store_;
    std::uint64_t t_ = 1;
    Rng rng_;
    bool awaiting_ingest_ = false;
    Phase pending_phase_ = Phase::Explore;
    std::vector<Interval> pending_located_;
};

struct EpsGreedyParams {
    int num_types = 0;
    int num_actions = 0;
    double decay = 1.0;        // explore with probability min(1, decay/t)
    unsigned grid_level = 2;   // fixed dyadic grid resolution per type
    double observe_cost = 0.0;
    std::uint64_t seed = 0;
};

/// Contextual epsilon-greedy over a fixed full-dimensional grid: every step
/// observes its reward; exploitation picks the best sample mean in the current
/// grid cell.
class EpsilonGreedyPolicy {
public:
    explicit EpsilonGreedyPolicy(const EpsGreedyParams& params)
        : params_(params), rng_(derive_seed(params.seed, 0x657073)) {
        if (params_.num_types < 1) throw std::invalid_argument("params: num_types must be positive");
        if (params_.num_actions < 1) throw std::invalid_argument("params: num_actions must be positive");
        if (!(params_.decay >= 0.0)) throw std::invalid_argument("params: decay must be nonnegative");
        if (params_.grid_level > 20) throw std::invalid_argument("params: grid level too large");
    }

    const EpsGreedyParams& params() const { return params_; }
    std::uint64_t time() const { return t_; }
    unsigned max_interval_level() const { return params_.grid_level; }

    Decision step(const std::vector<double>& context, StepTrace* = nullptr) {
        if (awaiting_ingest_) throw std::logic_error("step: previous decision not ingested");
        if (static_cast<int>(context.size()) != params_.num_types) {
            throw std::domain_error("step: context dimension mismatch");
        }
        pending_cell_ = cell_of(context);
        Decision decision;
        decision.observe = true;
        const double eps = std::min(1.0, params_.decay / static_cast<double>(t_));
        if (rng_.uniform01() < eps) {
            decision.phase = Phase::Explore;
            decision.action = static_cast<int>(rng_.bounded(static_cast<std::uint64_t>(params_.num_actions)));
        } else {
            decision.phase = Phase::Exploit;
            const auto it = cells_.find(pending_cell_);
            int best = 0;
            double best_mean = -1.0;
            for (int a = 0; a < params_.num_actions; ++a) {
                const double m = it == cells_.end() ? 0.0 : it->second[static_cast<std::size_t>(a)].mean();
                if (m > best_mean) {
                    best_mean = m;
                    best = a;
                }
            }
            decision.action = best;
        }
        awaiting_ingest_ = true;
        return decision;
    }

    void ingest(const Decision& decision, const std::vector<std::optional<double>>& rewards) {
        if (!awaiting_ingest_) throw std::logic_error("ingest: no pending decision");
        if (static_cast<int>(rewards.size()) != params_.num_actions ||
            !rewards[static_cast<std::size_t>(decision.action)].has_value()) {
            throw std::logic_error("ingest: missing required reward");
        }
        auto& cell = cells_[pending_cell_];
        if (cell.empty()) cell.resize(static_cast<std::size_t>(params_.num_actions));
        auto& entry = cell[static_cast<std::size_t>(decision.action)];
        entry.count += 1;
        entry.sum += *rewards[static_cast<std::size_t>(decision.action)];
        ++t_;
        awaiting_ingest_ = false;
    }

private:
    struct Entry {
        std::uint64_t count{0};
        double sum{0.0};
        double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
    };
    struct CellHash {
        std::size_t operator()(const std::vector<std::uint32_t>& cell) const {
            std::uint64_t h = 0x9E3779B97F4A7C15ULL;
            for (std::uint32_t v : cell) {
                h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
            }
            return static_cast<std::size_t>(h);
        }
    };

    std::vector<std::uint32_t> cell_of(const std::vector<double>& context) const {
        std::vector<std::uint32_t> cell(context.size());
        const auto cells_per_type = static_cast<std::uint32_t>(1u << params_.grid_level);
        for (std::size_t i = 0; i < context.size(); ++i) {
            const double x = context[i];
            if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("step: context outside [0,1]^D");
            const auto idx = static_cast<std::uint32_t>(x * cells_per_type);
            cell[i] = std::min(idx, cells_per_type - 1);
        }
        return cell;
    }

    EpsGreedyParams params_;
    std::unordered_map<std::vector<std::uint32_t>, std::vector<Entry>, CellHash> cells_;
    std::uint64_t t_ = 1;
    Rng rng_;
    bool awaiting_ingest_ = false;
    std::vector<std::uint32_t> pending_cell_;
};

}  // namespace releaf
