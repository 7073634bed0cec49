#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "releaf/combinatorics.hpp"
#include "releaf/partition.hpp"
#include "releaf/rng.hpp"
#include "releaf/stats.hpp"

namespace releaf {

/// Duration parameter at which exploration and exploitation regret orders balance.
inline constexpr double kBalancedRho = 2.0 + 2.0 * std::numbers::sqrt2;

enum class FeedbackMode {
    ExploreOnly,       // rewards observed only when exploring
    AllSteps,          // reward of the selected action observed every step
    FullObservation,   // rewards of all actions observed when exploring
};

enum class Phase { Explore, Exploit };

struct PolicyParams {
    int num_types = 0;        // D
    int num_actions = 0;      // |A|
    int gamma_rel = 1;        // number of relevant types learned per action
    double lipschitz = 1.0;   // L of the similarity assumption
    double rho = kBalancedRho;
    double confidence = 0.1;  // delta
    double observe_cost = 0.0;
    double control_scale = 1.0;   // control numbers are divided by this (kappa)
    unsigned initial_level = 0;   // partitions start as 2^initial_level equal intervals
    FeedbackMode feedback = FeedbackMode::ExploreOnly;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_types < 1) throw std::invalid_argument("params: num_types must be positive");
        if (num_actions < 1) throw std::invalid_argument("params: num_actions must be positive");
        if (gamma_rel < 1) throw std::invalid_argument("params: gamma_rel must be positive");
        if (num_types < 2 * gamma_rel) throw std::invalid_argument("params: relevance dimension too large for D");
        if (!(lipschitz > 0.0)) throw std::invalid_argument("params: lipschitz must be positive");
        if (!(rho > 0.0)) throw std::invalid_argument("params: rho must be positive");
        if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("params: confidence must be in (0,1)");
        if (!(observe_cost >= 0.0)) throw std::invalid_argument("params: observe_cost must be nonnegative");
        if (!(control_scale > 0.0)) throw std::invalid_argument("params: control_scale must be positive");
    }
};

/// Number of 2*gamma_rel tuples containing a fixed type: C(D-1, 2*gamma_rel-1).
inline std::uint64_t d_star(int num_types, int gamma_rel) {
    if (gamma_rel < 1) throw std::invalid_argument("d_star: gamma_rel must be positive");
    if (num_types < 2 * gamma_rel) throw std::invalid_argument("d_star: relevance dimension too large for D");
    return binomial(num_types - 1, 2 * gamma_rel - 1);
}

struct Decision {
    Phase phase = Phase::Explore;
    int action = 0;
    bool observe = false;  // beta
    std::vector<TypeTuple> estimated_relevant;  // per action, exploit steps only
    std::vector<bool> relevance_fallback;       // per action: candidate set was empty
};

/// Per-step internals, filled on request; lets tests re-derive every quantity
/// from the raw observation log and compare exactly.
struct StepTrace {
    std::vector<Interval> located;                    // p_t by type
    std::vector<double> control_numbers;              // by type, 0-based
    std::vector<int> underexplored;                   // sorted action ids
    std::vector<std::vector<TypeTuple>> rel_candidates;  // per action (exploit)
    std::vector<std::vector<double>> rel_variations;     // parallel to rel_candidates
    std::vector<double> aggregate_means;                 // per action (exploit)
};

/// Contextual bandit policy that learns, per action, which gamma_rel context
/// types its reward depends on, while adaptively refining a dyadic partition
/// of each type's domain. Exploration is gated by per-type control numbers;
/// exploitation aggregates sample means across all tuples containing the
/// estimated relevant tuple.
class ReleafPolicy {
public:
    explicit ReleafPolicy(const PolicyParams& params)
        : params_(params), rng_(derive_seed(params.seed, 0x72656C)) {
        params_.validate();
        d_star_ = d_star(params_.num_types, params_.gamma_rel);
        partitions_.reserve(static_cast<std::size_t>(params_.num_types));
        for (int i = 1; i <= params_.num_types; ++i) partitions_.emplace_back(i, params_.initial_level);
        tuples_2g_ = k_subsets(params_.num_types, 2 * params_.gamma_rel);
        tuples_g_ = k_subsets(params_.num_types, params_.gamma_rel);
        supersets_.resize(tuples_g_.size());
        for (std::size_t v = 0; v < tuples_g_.size(); ++v) {
            for (std::size_t w = 0; w < tuples_2g_.size(); ++w) {
                if (contains_all(tuples_2g_[w], tuples_g_[v])) supersets_[v].push_back(w);
            }
        }
    }

    const PolicyParams& params() const { return params_; }
    std::uint64_t time() const { return t_; }
    const StatsStore& stats() const { return store_; }
    /// Mutable store access, for state injection and snapshot restore.
    StatsStore& stats() { return store_; }

    const TypePartition& partition(int type_id) const {
        return partitions_.at(static_cast<std::size_t>(type_id - 1));
    }

    unsigned max_interval_level() const {
        unsigned m = 0;
        for (const auto& part : partitions_) m = std::max(m, part.max_level());
        return m;
    }

    /// Minimum observation count demanded per tuple for a type whose active
    /// interval has the given length, at time t. Floored at one observation
    /// so exploitation never divides by a zero count.
    double control_number(std::uint64_t t, double interval_length) const {
        const double cardinality = static_cast<double>(t) * static_cast<double>(d_star_) *
                                   static_cast<double>(params_.num_actions) / params_.confidence;
        const double raw = 2.0 * std::log(cardinality) /
                           ((params_.lipschitz * interval_length) * (params_.lipschitz * interval_length));
        return std::max(1.0, raw / params_.control_scale);
    }

    /// Actions lacking the control-number quota on some tuple at p_t, sorted.
    std::vector<int> underexplored(const std::vector<Interval>& located) const {
        const auto ctrl = control_numbers(located);
        std::vector<bool> under(static_cast<std::size_t>(params_.num_actions), false);
        for (const auto& types : tuples_2g_) {
            double need = 0.0;
            for (int i : types) need = std::max(need, ctrl[static_cast<std::size_t>(i - 1)]);
            const TupleKey key = key_for(types, located);
            for (int a = 0; a < params_.num_actions; ++a) {
                if (!under[static_cast<std::size_t>(a)] &&
                    static_cast<double>(store_.get(key, a).count) < need) {
                    under[static_cast<std::size_t>(a)] = true;
                }
            }
        }
        std::vector<int> out;
        for (int a = 0; a < params_.num_actions; ++a) {
            if (under[static_cast<std::size_t>(a)]) out.push_back(a);
        }
        return out;
    }

    /// Candidate relevant tuples: v qualifies when all sample means of action a
    /// over tuples containing v agree within 3*L*sqrt(gamma_rel)*max interval
    /// length of v.
    std::vector<TypeTuple> relevant_candidates(const std::vector<Interval>& located, int action) const {
        std::vector<TypeTuple> out;
        for (std::size_t v = 0; v < tuples_g_.size(); ++v) {
            if (within_variation_bound(located, v, action)) out.push_back(tuples_g_[v]);
        }
        return out;
    }

    /// Maximum pairwise gap between sample means of action over tuples containing v.
    double variation(const std::vector<Interval>& located, const TypeTuple& v, int action) const {
        const std::size_t vi = index_of_g_tuple(v);
        double lo = 1.0, hi = 0.0;
        for (std::size_t w : supersets_[vi]) {
            const double m = store_.get(key_for(tuples_2g_[w], located), action).mean;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        return std::max(0.0, hi - lo);
    }

    /// Estimated relevant tuple for an action at an exploitation step: the
    /// candidate with minimum variation (lexicographic tie-break), or a tuple
    /// drawn uniformly at random when no candidate qualifies (flag set).
    std::pair<TypeTuple, bool> estimated_relevant(const std::vector<Interval>& located, int action) {
        return pick_relevant(located, action, relevant_candidates(located, action));
    }

    /// Count-weighted average of sample means over all tuples containing v.
    double aggregate_mean(const std::vector<Interval>& located, const TypeTuple& v, int action) const {
        const std::size_t vi = index_of_g_tuple(v);
        double total_sum = 0.0;
        std::uint64_t total_count = 0;
        for (std::size_t w : supersets_[vi]) {
            const TupleKey key = key_for(tuples_2g_[w], located);
            total_sum += store_.sum(key, action);
            total_count += store_.get(key, action).count;
        }
        if (total_count == 0) throw std::logic_error("aggregate_mean: zero total count");
        return total_sum / static_cast<double>(total_count);
    }

    /// One decision. The caller must follow with ingest() before stepping again.
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
            decision.observe = params_.feedback == FeedbackMode::AllSteps;
            decision.estimated_relevant.resize(static_cast<std::size_t>(params_.num_actions));
            decision.relevance_fallback.resize(static_cast<std::size_t>(params_.num_actions));
            if (trace) {
                trace->rel_candidates.resize(static_cast<std::size_t>(params_.num_actions));
                trace->rel_variations.resize(static_cast<std::size_t>(params_.num_actions));
                trace->aggregate_means.resize(static_cast<std::size_t>(params_.num_actions));
            }
            int best = 0;
            double best_mean = -1.0;
            for (int a = 0; a < params_.num_actions; ++a) {
                auto rel = relevant_candidates(located, a);
                auto [tuple, fallback] = pick_relevant(located, a, rel);
                const double mean = aggregate_mean(located, tuple, a);
                if (mean > best_mean) {
                    best_mean = mean;
                    best = a;
                }
                if (trace) {
                    auto& vars = trace->rel_variations[static_cast<std::size_t>(a)];
                    vars.reserve(rel.size());
                    for (const auto& cand : rel) vars.push_back(variation(located, cand, a));
                    trace->rel_candidates[static_cast<std::size_t>(a)] = rel;
                    trace->aggregate_means[static_cast<std::size_t>(a)] = mean;
                }
                decision.estimated_relevant[static_cast<std::size_t>(a)] = std::move(tuple);
                decision.relevance_fallback[static_cast<std::size_t>(a)] = fallback;
            }
            decision.action = best;
        }

        if (trace) {
            trace->located = located;
            trace->control_numbers = control_numbers(located);
            trace->underexplored = under;
        }
        pending_located_ = std::move(located);
        pending_decision_ = decision;
        awaiting_ingest_ = true;
        return decision;
    }

    /// Applies the observations of the step just decided: updates sample means
    /// for every active tuple per observed action, advances every type's
    /// arrival counter, executes splits with their statistics prunes, and
    /// advances time. rewards[a] must be present exactly when the feedback
    /// mode demands an observation of action a.
    void ingest(const Decision& decision, const std::vector<std::optional<double>>& rewards) {
        if (!awaiting_ingest_) throw std::logic_error("ingest: no pending decision");
        if (decision.phase != pending_decision_.phase || decision.action != pending_decision_.action) {
            throw std::logic_error("ingest: decision does not match pending step");
        }
        if (static_cast<int>(rewards.size()) != params_.num_actions) {
            throw std::logic_error("ingest: rewards size mismatch");
        }
        for (int a = 0; a < params_.num_actions; ++a) {
            const bool required = requires_observation(decision, a);
            if (rewards[static_cast<std::size_t>(a)].has_value() != required) {
                throw std::logic_error(required ? "ingest: missing required reward"
                                                : "ingest: unexpected reward supplied");
            }
        }
        for (int a = 0; a < params_.num_actions; ++a) {
            if (!rewards[static_cast<std::size_t>(a)]) continue;
            const double r = *rewards[static_cast<std::size_t>(a)];
            for (const auto& types : tuples_2g_) store_.update(key_for(types, pending_located_), a, r);
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

    /// Debug snapshot: time, live statistics cells, and every partition cell
    /// as a (type_id, level, index, counter) quadruple.
    std::string snapshot() const {
        std::ostringstream os;
        os << "t=" << t_ << " live_cells=" << store_.live_cells() << "\n";
        for (const auto& part : partitions_) {
            for (const auto& [p, n] : part.snapshot()) {
                os << part.type_id() << " " << p.level << " " << p.index << " " << n << "\n";
            }
        }
        return os.str();
    }

private:
    static bool contains_all(const TypeTuple& super, const TypeTuple& sub) {
        std::size_t j = 0;
        for (int i : super) {
            if (j < sub.size() && sub[j] == i) ++j;
        }
        return j == sub.size();
    }

    std::vector<double> control_numbers(const std::vector<Interval>& located) const {
        std::vector<double> ctrl(located.size());
        for (std::size_t i = 0; i < located.size(); ++i) ctrl[i] = control_number(t_, located[i].length());
        return ctrl;
    }

    TupleKey key_for(const TypeTuple& types, const std::vector<Interval>& located) const {
        TupleKey key;
        key.types = types;
        key.intervals.resize(types.size());
        for (std::size_t j = 0; j < types.size(); ++j) {
            key.intervals[j] = located[static_cast<std::size_t>(types[j] - 1)];
        }
        return key;
    }

    std::size_t index_of_g_tuple(const TypeTuple& v) const {
        for (std::size_t k = 0; k < tuples_g_.size(); ++k) {
            if (tuples_g_[k] == v) return k;
        }
        throw std::invalid_argument("unknown relevance tuple");
    }

    bool within_variation_bound(const std::vector<Interval>& located, std::size_t vi, int action) const {
        double max_len = 0.0;
        for (int i : tuples_g_[vi]) max_len = std::max(max_len, located[static_cast<std::size_t>(i - 1)].length());
        const double bound =
            3.0 * params_.lipschitz * std::sqrt(static_cast<double>(params_.gamma_rel)) * max_len;
        double lo = 1.0, hi = 0.0;
        for (std::size_t w : supersets_[vi]) {
            const double m = store_.get(key_for(tuples_2g_[w], located), action).mean;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        return hi <= lo || hi - lo <= bound;
    }

    std::pair<TypeTuple, bool> pick_relevant(const std::vector<Interval>& located, int action,
                                             const std::vector<TypeTuple>& candidates) {
        if (candidates.empty()) {
            return {tuples_g_[static_cast<std::size_t>(rng_.bounded(tuples_g_.size()))], true};
        }
        const TypeTuple* best = &candidates.front();
        double best_var = variation(located, candidates.front(), action);
        for (std::size_t k = 1; k < candidates.size(); ++k) {
            const double var = variation(located, candidates[k], action);
            if (var < best_var) {
                best_var = var;
                best = &candidates[k];
            }
        }
        return {*best, false};
    }

    bool requires_observation(const Decision& decision, int action) const {
        if (decision.phase == Phase::Explore) {
            if (params_.feedback == FeedbackMode::FullObservation) return true;
            return action == decision.action;
        }
        return params_.feedback == FeedbackMode::AllSteps && action == decision.action;
    }

    PolicyParams params_;
    std::uint64_t d_star_ = 0;
    std::vector<TypePartition> partitions_;
    StatsStore store_;
    std::vector<TypeTuple> tuples_2g_;
    std::vector<TypeTuple> tuples_g_;
    std::vector<std::vector<std::size_t>> supersets_;
    std::uint64_t t_ = 1;
    Rng rng_;
    bool awaiting_ingest_ = false;
    std::vector<Interval> pending_located_;
    Decision pending_decision_;
};

}  // namespace releaf
