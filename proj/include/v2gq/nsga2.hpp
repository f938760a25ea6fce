#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace v2gq::nsga2 {

// (voltage deviation, losses, cost), all minimized.
using Objectives = std::array<double, 3>;

// a is no worse than b everywhere and strictly better somewhere.
bool dominates(const Objectives& a, const Objectives& b);

struct Candidate {
    Objectives objectives{};
    bool feasible = true;
    double violation = 0.0;
};

// Feasible beats infeasible; between infeasible candidates the smaller total
// violation wins; between feasible ones plain Pareto dominance decides.
bool constrained_dominates(const Candidate& a, const Candidate& b);

using DominanceFn = std::function<bool(std::size_t, std::size_t)>;

// Fast nondominated sort over n items under the given dominance relation.
// Front k holds the items that are nondominated once fronts < k are removed;
// indices inside a front are ascending.
std::vector<std::vector<std::size_t>> sort_fronts(std::size_t n, const DominanceFn& dominates_fn);

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Objectives> pop);
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Candidate> pop);

// Per-item front rank from a front list.
std::vector<int> ranks_of(const std::vector<std::vector<std::size_t>>& fronts, std::size_t n);

// Crowding distance of each member of `front` (parallel to it). Members at
// either end of an objective get +infinity; objectives with no spread
// across the front contribute nothing.
std::vector<double> crowding_distance(std::span<const Objectives> pop, std::span<const std::size_t> front);

}  // namespace v2gq::nsga2
