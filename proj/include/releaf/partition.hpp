#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace releaf {

/// Dyadic sub-interval of [0,1] identified by (level, index).
///
/// The real set it denotes is (index*2^-level, (index+1)*2^-level], except the
/// index-0 interval which is closed at zero: [0, 2^-level]. Identity is the
/// integer pair, never floating endpoints, so intervals are exact hashable keys.
struct Interval {
    std::uint32_t level{0};
    std::uint64_t index{0};

    double length() const { return std::ldexp(1.0, -static_cast<int>(level)); }
    double lower() const { return std::ldexp(static_cast<double>(index), -static_cast<int>(level)); }
    double upper() const { return std::ldexp(static_cast<double>(index) + 1.0, -static_cast<int>(level)); }
    double center() const { return std::ldexp(static_cast<double>(index) + 0.5, -static_cast<int>(level)); }

    bool contains(double x) const {
        const bool above = (index == 0) ? x >= 0.0 : x > lower();
        return above && x <= upper();
    }

    /// The two level+1 halves whose union gives this interval.
    std::pair<Interval, Interval> children() const {
        return {Interval{level + 1, 2 * index}, Interval{level + 1, 2 * index + 1}};
    }

    friend bool operator==(const Interval&, const Interval&) = default;
    friend auto operator<=>(const Interval&, const Interval&) = default;
};

struct IntervalHash {
    std::size_t operator()(const Interval& p) const {
        std::uint64_t h = (static_cast<std::uint64_t>(p.level) << 57) ^ p.index;
        h ^= h >> 33;
        h *= 0xFF51AFD7ED558CCDULL;
        h ^= h >> 33;
        return static_cast<std::size_t>(h);
    }
};

/// Adaptive dyadic partition of [0,1] for one context type, with per-interval
/// arrival counters. Active intervals are pairwise disjoint and cover [0,1].
/// An interval of level l is replaced by its two halves on the first arrival
/// at which its integer counter reaches 2^(rho*l).
class TypePartition {
public:
    explicit TypePartition(int type_id, unsigned initial_level = 0) : type_id_(type_id), max_level_(initial_level) {
        if (initial_level > 30) throw std::invalid_argument("TypePartition: initial level too large");
        const std::uint64_t n = std::uint64_t{1} << initial_level;
        cells_.reserve(n);
        for (std::uint64_t k = 0; k < n; ++k) cells_.emplace(Interval{initial_level, k}, 0);
    }

    int type_id() const { return type_id_; }
    std::size_t num_active() const { return cells_.size(); }
    unsigned max_level() const { return max_level_; }
    bool is_active(const Interval& p) const { return cells_.count(p) != 0; }

    std::uint64_t count(const Interval& p) const {
        auto it = cells_.find(p);
        return it == cells_.end() ? 0 : it->second;
    }

    /// The unique active interval containing x under the (a,b] / [0,b] convention.
    Interval locate(double x) const {
        if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("locate: context coordinate outside [0,1]");
        Interval p{};
        while (cells_.find(p) == cells_.end()) {
            if (p.level > 62) throw std::logic_error("locate: partition does not cover [0,1]");
            // Descend into the half containing x; x equal to the midpoint
            // belongs to the left (right-closed) child.
            const double mid = std::ldexp(static_cast<double>(2 * p.index) + 1.0, -static_cast<int>(p.level) - 1);
            p = Interval{p.level + 1, 2 * p.index + (x > mid ? 1 : 0)};
        }
        return p;
    }

    /// Increments the arrival counter of active interval p. If the counter
    /// reaches 2^(rho*l(p)), p is replaced by its two halves (counters zeroed)
    /// and they are returned so the caller can prune statistics keyed on p.
    std::optional<std::pair<Interval, Interval>> record_arrival(const Interval& p, double rho) {
        auto it = cells_.find(p);
        if (it == cells_.end()) throw std::logic_error("record_arrival: interval not active");
        ++it->second;
        if (static_cast<double>(it->second) >= std::exp2(rho * static_cast<double>(p.level))) {
            auto kids = p.children();
            cells_.erase(it);
            cells_.emplace(kids.first, 0);
            cells_.emplace(kids.second, 0);
            max_level_ = std::max(max_level_, kids.first.level);
            return kids;
        }
        return std::nullopt;
    }

    /// Active intervals sorted by position, with counters.
    std::vector<std::pair<Interval, std::uint64_t>> snapshot() const {
        std::vector<std::pair<Interval, std::uint64_t>> out(cells_.begin(), cells_.end());
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first.lower() < b.first.lower(); });
        return out;
    }

private:
    int type_id_;
    unsigned max_level_;
    std::unordered_map<Interval, std::uint64_t, IntervalHash> cells_;
};

}  // namespace releaf
