#include <algorithm>
#include <cmath>
#include <limits>

#include "balance/network.hpp"

namespace balance {

namespace {

struct Cluster {
    std::size_t label;  // lowest member index
    std::vector<std::size_t> leaves;
};

}  // namespace

// Naive O(N^3) UPGMA. N is a few dozen stocks, so this is never the bottleneck.
std::vector<std::size_t> cluster_order(const CorrelationMatrix& corr) {
    const std::size_t n = corr.size();
    if (n == 0) return {};

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double c = corr.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            dist[i][j] = i == j ? 0.0 : std::sqrt(std::max(0.0, 2.0 * (1.0 - c)));
        }

    // Active clusters kept sorted by label; dist is indexed by label.
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}});

    while (active.size() > 1) {
        std::size_t best_a = 0, best_b = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < active.size(); ++a)
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double d = dist[active[a].label][active[b].label];
                // Only a strictly smaller distance (beyond rounding) displaces an earlier pair.
                if (std::isinf(best) || d < best - 1e-12 * std::max(1.0, best)) {
                    best = d;
                    best_a = a;
                    best_b = b;
                }
            }

        Cluster& keep = active[best_a];
        Cluster& gone = active[best_b];
        const double na = static_cast<double>(keep.leaves.size());
        const double nb = static_cast<double>(gone.leaves.size());
        for (const auto& other : active) {
            if (other.label == keep.label || other.label == gone.label) continue;
            const double d = (na * dist[keep.label][other.label] + nb * dist[gone.label][other.label]) /
                             (na + nb);
            dist[keep.label][other.label] = dist[other.label][keep.label] = d;
        }
        keep.leaves.insert(keep.leaves.end(), gone.leaves.begin(), gone.leaves.end());
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    }
    return active.front().leaves;
}

}  // namespace balance
