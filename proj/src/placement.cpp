#include "v2gq/placement.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <set>
#include <thread>

#include "v2gq/errors.hpp"

namespace v2gq {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
}

bool coin(std::mt19937_64& rng, double p) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; }

// Fills `buses` up to `lots` distinct entries with random candidates.
void refill(std::mt19937_64& rng, std::vector<int>& buses, const std::vector<int>& candidates, std::size_t lots) {
    std::sort(buses.begin(), buses.end());
    buses.erase(std::unique(buses.begin(), buses.end()), buses.end());
    while (buses.size() < lots) {
        const int b = candidates[pick(rng, candidates.size())];
        if (std::find(buses.begin(), buses.end(), b) == buses.end()) buses.push_back(b);
    }
}

std::pair<PlacementGenome, PlacementGenome> crossover(std::mt19937_64& rng, const PlacementGenome& a,
                                                      const PlacementGenome& b, const std::vector<int>& candidates) {
    const auto lots = a.lot_buses.size();
    std::vector<int> c1, c2;
    for (std::size_t i = 0; i < lots; ++i) {
        const bool swap = coin(rng, 0.5);
        c1.push_back(swap ? b.lot_buses[i] : a.lot_buses[i]);
        c2.push_back(swap ? a.lot_buses[i] : b.lot_buses[i]);
    }
    refill(rng, c1, candidates, lots);
    refill(rng, c2, candidates, lots);
    return {PlacementGenome(std::move(c1)), PlacementGenome(std::move(c2))};
}

PlacementGenome mutate(std::mt19937_64& rng, PlacementGenome g, const std::vector<int>& candidates, double rate) {
    auto buses = g.lot_buses;
    if (candidates.size() <= buses.size()) return g;
    bool changed = false;
    for (auto& b : buses) {
        if (!coin(rng, rate)) continue;
        int replacement;
        do {
            replacement = candidates[pick(rng, candidates.size())];
        } while (std::find(buses.begin(), buses.end(), replacement) != buses.end());
        b = replacement;
        changed = true;
    }
    return changed ? PlacementGenome(std::move(buses)) : g;
}

struct Ranked {
    std::vector<int> rank;
    std::vector<double> crowding;
};

Ranked rank_population(const std::vector<ObjectiveBreakdown>& objs, std::vector<std::vector<std::size_t>>* fronts_out) {
    std::vector<nsga2::Candidate> cands;
    std::vector<nsga2::Objectives> points;
    for (const auto& o : objs) {
        cands.push_back(to_candidate(o));
        points.push_back(cands.back().objectives);
    }
    auto fronts = nsga2::nondominated_sort(std::span<const nsga2::Candidate>(cands));
    Ranked r{nsga2::ranks_of(fronts, objs.size()), std::vector<double>(objs.size(), 0.0)};
    for (const auto& f : fronts) {
        const auto d = nsga2::crowding_distance(points, f);
        for (std::size_t k = 0; k < f.size(); ++k) r.crowding[f[k]] = d[k];
    }
    if (fronts_out) *fronts_out = std::move(fronts);
    return r;
}

std::size_t best_index(const std::vector<ObjectiveBreakdown>& objs, const std::vector<PlacementGenome>& genomes) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < objs.size(); ++i) {
        if (better(objs[i], objs[best]) || (!better(objs[best], objs[i]) && genomes[i] < genomes[best])) best = i;
    }
    return best;
}

}  // namespace

PlacementGenome::PlacementGenome(std::vector<int> buses) : lot_buses(std::move(buses)) {
    std::sort(lot_buses.begin(), lot_buses.end());
}

bool better(const ObjectiveBreakdown& a, const ObjectiveBreakdown& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (!a.feasible && a.violation_penalty != b.violation_penalty) return a.violation_penalty < b.violation_penalty;
    return a.scalar < b.scalar;
}

nsga2::Candidate to_candidate(const ObjectiveBreakdown& o) {
    return {{o.v_dev, o.loss, o.cost}, o.feasible, o.violation_penalty};
}

ObjectiveBreakdown PlacementEvaluator::evaluate(const PlacementGenome& g) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(g); it != cache_.end()) return it->second;
    }
    auto o = evaluate_objective(study_, g.lot_buses);
    std::lock_guard lock(mutex_);
    return cache_.emplace(g, o).first->second;
}

std::vector<ObjectiveBreakdown> PlacementEvaluator::evaluate_all(const std::vector<PlacementGenome>& genomes,
                                                                 unsigned threads) {
    std::vector<PlacementGenome> todo;
    {
        std::lock_guard lock(mutex_);
        std::set<PlacementGenome> queued;
        for (const auto& g : genomes) {
            if (!cache_.count(g) && queued.insert(g).second) todo.push_back(g);
        }
    }
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, todo.size()));
    if (threads <= 1) {
        for (const auto& g : todo) evaluate(g);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (auto i = next++; i < todo.size(); i = next++) evaluate(todo[i]);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    std::vector<ObjectiveBreakdown> out;
    out.reserve(genomes.size());
    std::lock_guard lock(mutex_);
    for (const auto& g : genomes) out.push_back(cache_.at(g));
    return out;
}

std::size_t PlacementEvaluator::unique_evaluations() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::vector<ArchiveEntry> ParetoArchive::front(int rank) const {
    std::vector<ArchiveEntry> out;
    for (const auto& e : entries) {
        if (e.rank == rank) out.push_back(e);
    }
    return out;
}

ParetoArchive build_archive(const std::map<PlacementGenome, ObjectiveBreakdown>& evaluated) {
    std::vector<PlacementGenome> genomes;
    std::vector<ObjectiveBreakdown> objs;
    for (const auto& [g, o] : evaluated) {
        genomes.push_back(g);
        objs.push_back(o);
    }
    const auto ranked = rank_population(objs, nullptr);
    ParetoArchive archive;
    for (std::size_t i = 0; i < genomes.size(); ++i)
        archive.entries.push_back({genomes[i], objs[i], ranked.rank[i], ranked.crowding[i]});
    std::stable_sort(archive.entries.begin(), archive.entries.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        if (a.rank != b.rank) return a.rank < b.rank;
        if (a.crowding != b.crowding) return a.crowding > b.crowding;
        return a.genome < b.genome;
    });
    return archive;
}

std::vector<int> resolve_candidates(const Network& net, const std::vector<int>& requested, std::size_t lots) {
    std::vector<int> out;
    if (requested.empty()) {
        for (const auto& b : net.buses()) {
            if (b.kind != BusKind::slack) out.push_back(b.id);
        }
    } else {
        std::set<int> seen;
        for (int b : requested) {
            if (!net.has_bus(b)) throw ArgumentError("candidate bus " + std::to_string(b) + " does not exist");
            if (net.bus(net.index_of(b)).kind == BusKind::slack)
                throw ArgumentError("candidate bus " + std::to_string(b) + " is the slack bus");
            if (seen.insert(b).second) out.push_back(b);
        }
    }
    if (lots == 0) throw InfeasibleError("no parking-lot templates to place");
    if (out.size() < lots)
        throw InfeasibleError("cannot place " + std::to_string(lots) + " lots on " + std::to_string(out.size()) +
                              " candidate buses");
    std::sort(out.begin(), out.end());
    return out;
}

PlacementGenome random_placement(std::mt19937_64& rng, const std::vector<int>& candidates, std::size_t lots) {
    std::vector<int> buses;
    refill(rng, buses, candidates, lots);
    return PlacementGenome(std::move(buses));
}

PlacementResult optimize_placement(const Study& study, const GaParams& params) {
    PlacementEvaluator evaluator(study);
    return optimize_placement(evaluator, params);
}

PlacementResult optimize_placement(PlacementEvaluator& evaluator, const GaParams& params) {
    const auto& study = evaluator.study();
    const auto lots = study.fleet().lots.size();
    if (params.population < 4 || params.population % 2 != 0)
        throw ArgumentError("population size must be even and at least 4");
    if (params.generations < 0) throw ArgumentError("generation count must be nonnegative");
    if (!(params.mutation_rate >= 0.0 && params.mutation_rate <= 1.0))
        throw ArgumentError("mutation rate must lie in [0, 1]");
    const auto candidates = resolve_candidates(study.network(), params.candidates, lots);
    const auto n = static_cast<std::size_t>(params.population);

    std::mt19937_64 rng(params.seed);
    std::map<PlacementGenome, ObjectiveBreakdown> seen;
    auto evaluate = [&](const std::vector<PlacementGenome>& genomes) {
        auto objs = evaluator.evaluate_all(genomes, params.threads);
        for (std::size_t i = 0; i < genomes.size(); ++i) seen.emplace(genomes[i], objs[i]);
        return objs;
    };

    std::vector<PlacementGenome> pop;
    for (std::size_t i = 0; i < n; ++i) pop.push_back(random_placement(rng, candidates, lots));
    auto objs = evaluate(pop);

    PlacementResult result;
    result.best_by_generation.push_back(objs[best_index(objs, pop)]);

    for (int gen = 0; gen < params.generations; ++gen) {
        const auto ranked = rank_population(objs, nullptr);
        auto tournament = [&]() -> const PlacementGenome& {
            const auto a = pick(rng, n);
            const auto b = pick(rng, n);
            if (ranked.rank[a] != ranked.rank[b]) return pop[ranked.rank[a] < ranked.rank[b] ? a : b];
            return pop[ranked.crowding[b] > ranked.crowding[a] ? b : a];
        };

        std::vector<PlacementGenome> children;
        while (children.size() < n) {
            const auto& p1 = tournament();
            const auto& p2 = tournament();
            auto [c1, c2] = crossover(rng, p1, p2, candidates);
            children.push_back(mutate(rng, std::move(c1), candidates, params.mutation_rate));
            children.push_back(mutate(rng, std::move(c2), candidates, params.mutation_rate));
        }
        const auto child_objs = evaluate(children);

        // Parents and offspring, duplicates dropped.
        std::vector<PlacementGenome> merged;
        std::vector<ObjectiveBreakdown> merged_objs;
        std::set<PlacementGenome> present;
        auto add = [&](const PlacementGenome& g, const ObjectiveBreakdown& o) {
            if (present.insert(g).second) {
                merged.push_back(g);
                merged_objs.push_back(o);
            }
        };
        for (std::size_t i = 0; i < n; ++i) add(pop[i], objs[i]);
        for (std::size_t i = 0; i < n; ++i) add(children[i], child_objs[i]);

        std::vector<std::vector<std::size_t>> fronts;
        const auto merged_rank = rank_population(merged_objs, &fronts);
        const auto elite = best_index(merged_objs, merged);

        std::vector<std::size_t> survivors;
        for (const auto& front : fronts) {
            if (survivors.size() + front.size() <= n) {
                survivors.insert(survivors.end(), front.begin(), front.end());
                continue;
            }
            auto order = front;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return merged_rank.crowding[a] > merged_rank.crowding[b];
            });
            order.resize(n - survivors.size());
            survivors.insert(survivors.end(), order.begin(), order.end());
            break;
        }
        if (std::find(survivors.begin(), survivors.end(), elite) == survivors.end()) survivors.back() = elite;
        // Too few distinct genomes: pad with copies of the survivors.
        for (std::size_t i = 0; survivors.size() < n; ++i) survivors.push_back(survivors[i]);

        std::vector<PlacementGenome> next_pop;
        std::vector<ObjectiveBreakdown> next_objs;
        for (auto i : survivors) {
            next_pop.push_back(merged[i]);
            next_objs.push_back(merged_objs[i]);
        }
        pop = std::move(next_pop);
        objs = std::move(next_objs);
        result.best_by_generation.push_back(objs[best_index(objs, pop)]);
    }

    result.archive = build_archive(seen);
    result.evaluations = seen.size();
    const auto front0 = result.archive.front(0);
    result.best = front0.front();
    for (const auto& e : front0) {
        if (better(e.objective, result.best.objective) ||
            (!better(result.best.objective, e.objective) && e.genome < result.best.genome))
            result.best = e;
    }
    return result;
}

}  // namespace v2gq
