#include "iotagent/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "iotagent/errors.hpp"
#include "iotagent/json_io.hpp"

namespace iotagent {

namespace {

constexpr int kCheckpointVersion = 1;
constexpr const char* kCheckpointFormat = "iotagent-checkpoint";

std::string save_rng(const std::mt19937_64& rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

std::mt19937_64 load_rng(const std::string& state) {
    std::mt19937_64 rng;
    std::istringstream in(state);
    in >> rng;
    if (!in) throw CorruptFileError("rng state is malformed");
    return rng;
}

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double gaussian(std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Higher fitness wins; equal fitness goes to the sparser genome.
bool ranks_above(double fa, int liveA, double fb, int liveB) { return fa > fb || (fa == fb && liveA < liveB); }

std::size_t tournament(const std::vector<Individual>& pop, const std::vector<int>& live, int k,
                       std::mt19937_64& rng) {
    std::size_t best = uniform_index(rng, pop.size());
    for (int i = 1; i < k; ++i) {
        const std::size_t c = uniform_index(rng, pop.size());
        if (ranks_above(*pop[c].fitness, live[c], *pop[best].fitness, live[best])) best = c;
    }
    return best;
}

Genome breed(const NetworkSpec& spec, const EvolutionConfig& cfg, const Genome& a, const Genome& b,
             std::mt19937_64& rng) {
    std::vector<double> wa = a.flat();
    if (uniform01(rng) < cfg.crossoverRate) {
        const std::vector<double> wb = b.flat();
        for (std::size_t i = 0; i < wa.size(); ++i)
            if (uniform01(rng) < 0.5) wa[i] = wb[i];
    }
    for (double& w : wa) {
        if (uniform01(rng) < cfg.mutationRate) w += cfg.mutationSigma * gaussian(rng);
        w = std::clamp(w, spec.weightLo, spec.weightHi);
    }
    return prune(spec, Genome::from_flat(spec, wa));
}

}  // namespace

void EvolutionConfig::check() const {
    if (popSize < 1) throw ValidationError("must be positive", "evoConfig.popSize");
    if (generations < 1) throw ValidationError("must be positive", "evoConfig.generations");
    if (tournamentK < 2 || tournamentK > popSize)
        throw ValidationError("requires 2 <= tournamentK <= popSize", "evoConfig.tournamentK");
    if (!(crossoverRate >= 0.0 && crossoverRate <= 1.0))
        throw ValidationError("must be a probability", "evoConfig.crossoverRate");
    if (!(mutationRate >= 0.0 && mutationRate <= 1.0))
        throw ValidationError("must be a probability", "evoConfig.mutationRate");
    if (!(mutationSigma > 0.0)) throw ValidationError("must be positive", "evoConfig.mutationSigma");
    if (elitism < 1 || elitism >= popSize) throw ValidationError("requires 1 <= elitism < popSize", "evoConfig.elitism");
}

void EvolutionState::invalidateFitness() {
    for (auto& ind : population) ind.fitness.reset();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

EvolutionState init_population(const NetworkSpec& spec, const EvolutionConfig& config) {
    spec.check();
    config.check();
    EvolutionState state;
    state.config = config;
    state.spec = spec;
    std::mt19937_64 rng(config.seed);
    state.population.reserve(static_cast<std::size_t>(config.popSize));
    for (int i = 0; i < config.popSize; ++i) state.population.push_back({random_genome(spec, rng), std::nullopt});
    state.bestGenome = Genome(spec.inputs, spec.hidden, spec.outputs);
    state.rngState = save_rng(rng);
    return state;
}

void evaluate_missing(std::vector<Individual>& population, const FitnessFunction& fitness, unsigned workers) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < population.size(); ++i)
        if (!population[i].fitness) todo.push_back(i);
    if (todo.empty()) return;

    std::vector<double> results(todo.size());
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(todo.size()));

    if (workers <= 1) {
        for (std::size_t k = 0; k < todo.size(); ++k) results[k] = fitness.evaluate(population[todo[k]].genome);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> threads;
            for (unsigned w = 0; w < workers; ++w)
                threads.emplace_back([&, w] {
                    try {
                        for (std::size_t k = w; k < todo.size(); k += workers)
                            results[k] = fitness.evaluate(population[todo[k]].genome);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    for (std::size_t k = 0; k < todo.size(); ++k) population[todo[k]].fitness = results[k];
}

EvolutionState evolve_step(const EvolutionState& state, const FitnessFunction& fitness, unsigned workers) {
    if (!(fitness.spec == state.spec))
        throw ValidationError("fitness function spec does not match the evolution state", "spec");
    EvolutionState next = state;
    evaluate_missing(next.population, fitness, workers);

    const auto& pop = next.population;
    std::vector<int> live(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) live[i] = effective_topology(pop[i].genome).liveConnections;

    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranks_above(*pop[a].fitness, live[a], *pop[b].fitness, live[b]);
    });

    double sum = 0.0;
    for (const auto& ind : pop) sum += *ind.fitness;
    const std::size_t bestIdx = order.front();
    const double best = *pop[bestIdx].fitness;
    next.history.push_back({best, sum / static_cast<double>(pop.size())});
    if (!next.bestFitness || ranks_above(best, live[bestIdx], *next.bestFitness,
                                         effective_topology(next.bestGenome).liveConnections)) {
        next.bestFitness = best;
        next.bestGenome = pop[bestIdx].genome;
    }

    std::mt19937_64 rng = load_rng(state.rngState);
    const auto& cfg = next.config;
    std::vector<Individual> children;
    children.reserve(pop.size());
    for (int e = 0; e < cfg.elitism; ++e) children.push_back(pop[order[static_cast<std::size_t>(e)]]);
    while (children.size() < pop.size()) {
        const std::size_t a = tournament(pop, live, cfg.tournamentK, rng);
        const std::size_t b = tournament(pop, live, cfg.tournamentK, rng);
        children.push_back({breed(next.spec, cfg, pop[a].genome, pop[b].genome, rng), std::nullopt});
    }
    next.population = std::move(children);
    next.generation += 1;
    next.rngState = save_rng(rng);
    return next;
}

EvolutionState resume(const EvolutionState& state, const FitnessFunction& fitness, int moreGenerations,
                      unsigned workers) {
    if (!(fitness.spec == state.spec))
        throw ValidationError("fitness function spec does not match the evolution state", "spec");
    if (moreGenerations < 0) throw ValidationError("must not be negative", "moreGenerations");
    EvolutionState s = state;
    for (int g = 0; g < moreGenerations; ++g) s = evolve_step(s, fitness, workers);
    return s;
}

void check_invariants(const EvolutionState& state) {
    if (state.population.size() != static_cast<std::size_t>(state.config.popSize))
        throw ValidationError("population size differs from popSize", "population");
    for (std::size_t i = 0; i < state.population.size(); ++i)
        if (!satisfies_invariants(state.spec, state.population[i].genome))
            throw ValidationError("genome violates range or pruning invariants",
                                  "population[" + std::to_string(i) + "]");
    if (state.generation != static_cast<int>(state.history.size()))
        throw ValidationError("generation counter differs from history length", "generation");
    if (!state.history.empty()) {
        double maxBest = state.history.front().best;
        for (const auto& h : state.history) maxBest = std::max(maxBest, h.best);
        if (!state.bestFitness || *state.bestFitness != maxBest)
            throw ValidationError("bestFitness is not the maximum over history", "bestFitness");
        if (!satisfies_invariants(state.spec, state.bestGenome))
            throw ValidationError("best genome violates invariants", "bestGenome");
    }
}

nlohmann::json to_json(const EvolutionConfig& c) {
    return {{"popSize", c.popSize},
            {"generations", c.generations},
            {"tournamentK", c.tournamentK},
            {"crossoverRate", c.crossoverRate},
            {"mutationRate", c.mutationRate},
            {"mutationSigma", c.mutationSigma},
            {"elitism", c.elitism},
            {"seed", c.seed}};
}

EvolutionConfig evolution_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("must be an object", "evoConfig");
    EvolutionConfig c;
    try {
        c.popSize = j.value("popSize", c.popSize);
        c.generations = j.value("generations", c.generations);
        c.tournamentK = j.value("tournamentK", c.tournamentK);
        c.crossoverRate = j.value("crossoverRate", c.crossoverRate);
        c.mutationRate = j.value("mutationRate", c.mutationRate);
        c.mutationSigma = j.value("mutationSigma", c.mutationSigma);
        c.elitism = j.value("elitism", c.elitism);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(e.what(), "evoConfig");
    }
    c.check();
    return c;
}

nlohmann::json to_json(const EvolutionState& s) {
    nlohmann::json pop = nlohmann::json::array();
    for (const auto& ind : s.population)
        pop.push_back({{"weights", ind.genome.flat()},
                       {"fitness", ind.fitness ? nlohmann::json(*ind.fitness) : nlohmann::json(nullptr)}});
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : s.history) history.push_back({{"best", h.best}, {"mean", h.mean}});
    return {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"evoConfig", to_json(s.config)},
            {"spec", to_json(s.spec)},
            {"generation", s.generation},
            {"population", std::move(pop)},
            {"bestGenome", s.bestGenome.flat()},
            {"bestFitness", s.bestFitness ? nlohmann::json(*s.bestFitness) : nlohmann::json(nullptr)},
            {"history", std::move(history)},
            {"rngState", s.rngState}};
}

EvolutionState evolution_state_from_json(const nlohmann::json& j) {
    check_document_header(j, kCheckpointFormat, kCheckpointVersion);
    EvolutionState s;
    try {
        s.config = evolution_config_from_json(j.at("evoConfig"));
        s.spec = network_spec_from_json(j.at("spec"));
        s.generation = j.at("generation").get<int>();
        for (const auto& ind : j.at("population")) {
            Individual i{genome_from_json(s.spec, ind.at("weights")), std::nullopt};
            if (!ind.at("fitness").is_null()) i.fitness = ind.at("fitness").get<double>();
            s.population.push_back(std::move(i));
        }
        s.bestGenome = genome_from_json(s.spec, j.at("bestGenome"));
        if (!j.at("bestFitness").is_null()) s.bestFitness = j.at("bestFitness").get<double>();
        for (const auto& h : j.at("history"))
            s.history.push_back({h.at("best").get<double>(), h.at("mean").get<double>()});
        s.rngState = j.at("rngState").get<std::string>();
        load_rng(s.rngState);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("checkpoint is malformed: ") + e.what());
    } catch (const ValidationError& e) {
        throw CorruptFileError(std::string("checkpoint is malformed: ") + e.what());
    }
    return s;
}

void save_checkpoint(const EvolutionState& state, const std::string& path) { write_json_file(path, to_json(state)); }

EvolutionState load_checkpoint(const std::string& path) { return evolution_state_from_json(read_json_file(path)); }

}  // namespace iotagent
