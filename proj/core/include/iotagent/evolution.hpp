#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iotagent/neurogenome.hpp"

namespace iotagent {

struct EvolutionConfig {
    int popSize = 50;
    int generations = 60;
    int tournamentK = 3;
    double crossoverRate = 0.75;
    double mutationRate = 0.10;   // per weight
    double mutationSigma = 0.30;
    int elitism = 2;
    std::uint64_t seed = 1;

    bool operator==(const EvolutionConfig&) const = default;
    void check() const;
};

struct Individual {
    Genome genome;
    std::optional<double> fitness;  // nullopt: not evaluated in the current environment

    bool operator==(const Individual&) const = default;
};

struct GenerationStats {
    double best = 0.0;
    double mean = 0.0;

    bool operator==(const GenerationStats&) const = default;
};

struct EvolutionState {
    EvolutionConfig config;
    NetworkSpec spec;
    int generation = 0;
    std::vector<Individual> population;
    Genome bestGenome;
    std::optional<double> bestFitness;
    std::vector<GenerationStats> history;
    std::string rngState;

    bool operator==(const EvolutionState&) const = default;

    /// Every member must be re-evaluated (the fitness landscape changed).
    void invalidateFitness();
};

/// Fitness of one genome under a fixed network spec. `evaluate` must be
/// deterministic and safe to call concurrently.
struct FitnessFunction {
    NetworkSpec spec;
    std::function<double(const Genome&)> evaluate;
};

EvolutionState init_population(const NetworkSpec& spec, const EvolutionConfig& config);

/// One generation: evaluate missing fitness values, record history, then breed
/// the next population (elites, tournament selection, uniform crossover,
/// Gaussian mutation, clamp, prune). `workers` = 0 uses hardware concurrency;
/// the result does not depend on it. If `evaluate` throws, the exception
/// propagates and `state` is untouched.
EvolutionState evolve_step(const EvolutionState& state, const FitnessFunction& fitness, unsigned workers = 0);

/// Runs `moreGenerations` further steps. Throws ValidationError when the
/// fitness function was built for a different spec.
EvolutionState resume(const EvolutionState& state, const FitnessFunction& fitness, int moreGenerations,
                      unsigned workers = 0);

/// Evaluates every member without fitness, in population order.
void evaluate_missing(std::vector<Individual>& population, const FitnessFunction& fitness, unsigned workers = 0);

/// Throws ValidationError describing the first broken invariant.
void check_invariants(const EvolutionState& state);

/// Derives an independent seed for a numbered sub-run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

nlohmann::json to_json(const EvolutionConfig& config);
EvolutionConfig evolution_config_from_json(const nlohmann::json& j);

/// Checkpoint document (format "iotagent-checkpoint").
nlohmann::json to_json(const EvolutionState& state);
/// Throws VersionError for an unsupported version, CorruptFileError for a
/// malformed document.
EvolutionState evolution_state_from_json(const nlohmann::json& j);

void save_checkpoint(const EvolutionState& state, const std::string& path);
EvolutionState load_checkpoint(const std::string& path);

}  // namespace iotagent
