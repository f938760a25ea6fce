#include "v2gq/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace v2gq::nsga2 {

bool dominates(const Objectives& a, const Objectives& b) {
    bool strictly = false;
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (a[m] > b[m]) return false;
        if (a[m] < b[m]) strictly = true;
    }
    return strictly;
}

bool constrained_dominates(const Candidate& a, const Candidate& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (!a.feasible) return a.violation < b.violation;
    return dominates(a.objectives, b.objectives);
}

std::vector<std::vector<std::size_t>> sort_fronts(std::size_t n, const DominanceFn& dominates_fn) {
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates_fn(p, q)) {
                dominated[p].push_back(q);
                ++domination_count[q];
            } else if (dominates_fn(q, p)) {
                dominated[q].push_back(p);
                ++domination_count[p];
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        if (domination_count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current) {
            for (auto q : dominated[p]) {
                if (--domination_count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Objectives> pop) {
    return sort_fronts(pop.size(), [&](std::size_t a, std::size_t b) { return dominates(pop[a], pop[b]); });
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Candidate> pop) {
    return sort_fronts(pop.size(),
                       [&](std::size_t a, std::size_t b) { return constrained_dominates(pop[a], pop[b]); });
}

std::vector<int> ranks_of(const std::vector<std::vector<std::size_t>>& fronts, std::size_t n) {
    std::vector<int> rank(n, -1);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        for (auto i : fronts[f]) rank[i] = static_cast<int>(f);
    }
    return rank;
}

std::vector<double> crowding_distance(std::span<const Objectives> pop, std::span<const std::size_t> front) {
    const auto n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < std::tuple_size_v<Objectives>; ++m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return pop[front[a]][m] < pop[front[b]][m]; });
        const double lo = pop[front[order.front()]][m];
        const double hi = pop[front[order.back()]][m];
        const double span = hi - lo;
        if (!(span > 0.0)) continue;
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        if (!std::isfinite(span)) continue;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (dist[order[k]] == inf) continue;
            dist[order[k]] += (pop[front[order[k + 1]]][m] - pop[front[order[k - 1]]][m]) / span;
        }
    }
    return dist;
}

}  // namespace v2gq::nsga2
