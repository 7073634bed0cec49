#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace releaf {

/// Exact binomial coefficient C(n, k). Throws on negative arguments.
inline std::uint64_t binomial(int n, int k) {
    if (n < 0 || k < 0) throw std::invalid_argument("binomial: negative argument");
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (int j = 1; j <= k; ++j) {
        result = result * static_cast<std::uint64_t>(n - k + j) / static_cast<std::uint64_t>(j);
    }
    return result;
}

/// All k-element subsets of {1, ..., d} in lexicographic order, each sorted ascending.
inline std::vector<std::vector<int>> k_subsets(int d, int k) {
    if (d < 0 || k < 0) throw std::invalid_argument("k_subsets: negative argument");
    std::vector<std::vector<int>> out;
    if (k > d) return out;
    std::vector<int> pick(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) pick[static_cast<std::size_t>(j)] = j + 1;
    while (true) {
        out.push_back(pick);
        int j = k - 1;
        while (j >= 0 && pick[static_cast<std::size_t>(j)] == d - (k - 1 - j)) --j;
        if (j < 0) break;
        ++pick[static_cast<std::size_t>(j)];
        for (int m = j + 1; m < k; ++m) {
            pick[static_cast<std::size_t>(m)] = pick[static_cast<std::size_t>(m - 1)] + 1;
        }
    }
    return out;
}

}  // namespace releaf
