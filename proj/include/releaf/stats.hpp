#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "releaf/combinatorics.hpp"
#include "releaf/partition.hpp"

namespace releaf {

/// Sorted tuple of distinct type ids (1-based).
using TypeTuple = std::vector<int>;

/// Key for a statistics cell: a tuple of types together with one active
/// interval per type, in matching order. Canonical form has strictly
/// increasing type ids, so (i,j) and (j,i) name the same cell.
struct TupleKey {
    TypeTuple types;
    std::vector<Interval> intervals;

    TupleKey() = default;
    TupleKey(TypeTuple t, std::vector<Interval> iv) : types(std::move(t)), intervals(std::move(iv)) {
        if (types.size() != intervals.size()) throw std::invalid_argument("TupleKey: size mismatch");
        canonicalize();
    }

    friend bool operator==(const TupleKey&, const TupleKey&) = default;

private:
    void canonicalize() {
        std::vector<std::size_t> order(types.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return types[a] < types[b]; });
        TypeTuple t2(types.size());
        std::vector<Interval> iv2(intervals.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            t2[k] = types[order[k]];
            iv2[k] = intervals[order[k]];
        }
        for (std::size_t k = 1; k < t2.size(); ++k) {
            if (t2[k] == t2[k - 1]) throw std::invalid_argument("TupleKey: duplicate type id");
        }
        types = std::move(t2);
        intervals = std::move(iv2);
    }
};

/// Observation count and sample mean of one (tuple, action) cell.
struct StatCell {
    std::uint64_t count{0};
    double mean{0.0};
};

/// Hash-keyed store of sample means for actions over tuples of intervals.
/// Internally keeps running sums so that a replay of the same reward sequence
/// reproduces identical floating-point means.
class StatsStore {
public:
    void update(const TupleKey& key, int action, double reward) {
        if (!(reward >= 0.0 && reward <= 1.0)) throw std::domain_error("update: reward outside [0,1]");
        auto& entry = cells_[CellKey{key, action}];
        entry.count += 1;
        entry.sum += reward;
    }

    /// Stored cell, or a zero cell for never-touched keys.
    StatCell get(const TupleKey& key, int action) const {
        auto it = cells_.find(CellKey{key, action});
        if (it == cells_.end()) return {};
        return {it->second.count, it->second.sum / static_cast<double>(it->second.count)};
    }

    /// Running reward sum of a cell (count * mean, held exactly).
    double sum(const TupleKey& key, int action) const {
        auto it = cells_.find(CellKey{key, action});
        return it == cells_.end() ? 0.0 : it->second.sum;
    }

    /// Removes every cell whose key contains old_interval for type_id.
    /// Cells for the replacement children start from zero on first touch.
    void prune_on_split(int type_id, const Interval& old_interval) {
        for (auto it = cells_.begin(); it != cells_.end();) {
            if (references(it->first.tuple, type_id, old_interval)) {
                it = cells_.erase(it);
            } else {
                ++it;
            }
        }
    }

    std::size_t live_cells() const { return cells_.size(); }

    void clear() { cells_.clear(); }

    /// Sorted text dump: types, interval levels/indices, action, count, mean.
    std::string dump() const {
        std::vector<std::string> lines;
        lines.reserve(cells_.size());
        for (const auto& [key, entry] : cells_) {
            std::ostringstream os;
            os << "types=";
            for (std::size_t k = 0; k < key.tuple.types.size(); ++k) {
                os << (k ? "," : "") << key.tuple.types[k];
            }
            os << " intervals=";
            for (std::size_t k = 0; k < key.tuple.intervals.size(); ++k) {
                os << (k ? "," : "") << key.tuple.intervals[k].level << ":" << key.tuple.intervals[k].index;
            }
            os << " action=" << key.action << " count=" << entry.count
               << " mean=" << (entry.count ? entry.sum / static_cast<double>(entry.count) : 0.0);
            lines.push_back(os.str());
        }
        std::sort(lines.begin(), lines.end());
        std::string out;
        for (const auto& line : lines) {
            out += line;
            out += '\n';
        }
        return out;
    }

private:
    struct CellKey {
        TupleKey tuple;
        int action{0};
        friend bool operator==(const CellKey&, const CellKey&) = default;
    };
    struct Entry {
        std::uint64_t count{0};
        double sum{0.0};
    };
    struct CellKeyHash {
        std::size_t operator()(const CellKey& k) const {
            std::uint64_t h = 0x811C9DC5ULL ^ static_cast<std::uint64_t>(k.action);
            for (std::size_t j = 0; j < k.tuple.types.size(); ++j) {
                h = mix(h ^ static_cast<std::uint64_t>(k.tuple.types[j]));
                h = mix(h ^ (static_cast<std::uint64_t>(k.tuple.intervals[j].level) << 57) ^
                        k.tuple.intervals[j].index);
            }
            return static_cast<std::size_t>(h);
        }
        static std::uint64_t mix(std::uint64_t z) {
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        }
    };

    static bool references(const TupleKey& key, int type_id, const Interval& p) {
        for (std::size_t j = 0; j < key.types.size(); ++j) {
            if (key.types[j] == type_id && key.intervals[j] == p) return true;
        }
        return false;
    }

    std::unordered_map<CellKey, Entry, CellKeyHash> cells_;
};

/// The tuple keys active at one step: all C(D, 2*gamma_rel) canonical
/// 2*gamma_rel-tuples of types with the current interval per type, plus the
/// index of every tuple containing each type.
struct TupleEnumeration {
    std::vector<TupleKey> keys;                      // lexicographic in types
    std::vector<std::vector<std::size_t>> by_type;   // 1-based; by_type[i] -> indices into keys
};

/// current[i-1] is the active interval of type i; current.size() is D.
/// D must be at least 2*gamma_rel for any tuple to exist.
inline TupleEnumeration tuple_keys(const std::vector<Interval>& current, int gamma_rel) {
    const int dim = static_cast<int>(current.size());
    if (gamma_rel < 1) throw std::invalid_argument("tuple_keys: gamma_rel must be positive");
    if (dim < 2 * gamma_rel) throw std::invalid_argument("tuple_keys: relevance dimension too large for D");
    TupleEnumeration out;
    out.by_type.assign(static_cast<std::size_t>(dim) + 1, {});
    const auto combos = k_subsets(dim, 2 * gamma_rel);
    out.keys.reserve(combos.size());
    for (const auto& types : combos) {
        std::vector<Interval> ivs(types.size());
        for (std::size_t j = 0; j < types.size(); ++j) ivs[j] = current[static_cast<std::size_t>(types[j] - 1)];
        const std::size_t idx = out.keys.size();
        out.keys.emplace_back(types, std::move(ivs));
        for (int i : types) out.by_type[static_cast<std::size_t>(i)].push_back(idx);
    }
    return out;
}

}  // namespace releaf
