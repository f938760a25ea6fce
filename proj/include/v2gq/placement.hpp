#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <vector>

#include "v2gq/nsga2.hpp"
#include "v2gq/scenario.hpp"

namespace v2gq {

// Distinct lot buses, kept sorted; lot i of the fleet goes to lot_buses[i].
struct PlacementGenome {
    std::vector<int> lot_buses;

    PlacementGenome() = default;
    explicit PlacementGenome(std::vector<int> buses);

    auto operator<=>(const PlacementGenome&) const = default;
};

// Ordering used to pick "the best" placement: feasible first, then smaller
// violation, then smaller weighted scalar.
bool better(const ObjectiveBreakdown& a, const ObjectiveBreakdown& b);

nsga2::Candidate to_candidate(const ObjectiveBreakdown& o);

// Memoizing, thread-safe front end to evaluate_objective. Evaluation is a
// pure function of the genome, so one evaluator may serve several searches.
class PlacementEvaluator {
  public:
    explicit PlacementEvaluator(const Study& study) : study_(study) {}

    const Study& study() const { return study_; }

    ObjectiveBreakdown evaluate(const PlacementGenome& g);

    // Evaluates every uncached genome, using up to `threads` workers (0 = hardware concurrency).
    std::vector<ObjectiveBreakdown> evaluate_all(const std::vector<PlacementGenome>& genomes, unsigned threads = 1);

    std::size_t unique_evaluations() const;

  private:
    const Study& study_;
    mutable std::mutex mutex_;
    std::map<PlacementGenome, ObjectiveBreakdown> cache_;
};

struct GaParams {
    int population = 40;
    int generations = 60;
    std::uint64_t seed = 1;
    double mutation_rate = 0.1;  // per lot bus
    std::vector<int> candidates;  // empty = every non-slack bus
    unsigned threads = 1;         // 0 = hardware concurrency
};

struct ArchiveEntry {
    PlacementGenome genome;
    ObjectiveBreakdown objective;
    int rank = 0;
    double crowding = 0.0;
};

// Every distinct placement the search evaluated, ranked into constrained
// nondominated fronts over (v_dev, loss, cost); sorted by rank, then by
// crowding distance (descending), then by genome.
struct ParetoArchive {
    std::vector<ArchiveEntry> entries;

    std::vector<ArchiveEntry> front(int rank) const;
};

ParetoArchive build_archive(const std::map<PlacementGenome, ObjectiveBreakdown>& evaluated);

struct PlacementResult {
    ParetoArchive archive;
    ArchiveEntry best;                                // minimizes `better` over the archive
    std::vector<ObjectiveBreakdown> best_by_generation;  // population best after each generation, [0] = initial
    std::size_t evaluations = 0;                      // distinct genomes evaluated by this search
};

// Candidate list after defaulting and validation.
std::vector<int> resolve_candidates(const Network& net, const std::vector<int>& requested, std::size_t lots);

PlacementGenome random_placement(std::mt19937_64& rng, const std::vector<int>& candidates, std::size_t lots);

// NSGA-II over lot placements: binary tournament on (rank, crowding), uniform
// set crossover with repair, per-bus replacement mutation, elitist (mu + lambda)
// survival that always retains the current best placement. Deterministic for a
// given seed regardless of the thread count.
PlacementResult optimize_placement(const Study& study, const GaParams& params);
PlacementResult optimize_placement(PlacementEvaluator& evaluator, const GaParams& params);

}  // namespace v2gq
