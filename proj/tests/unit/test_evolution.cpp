#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "iotagent/errors.hpp"
#include "iotagent/evolution.hpp"
#include "iotagent/json_io.hpp"

using namespace iotagent;

namespace {

NetworkSpec spec435() {
    NetworkSpec s;
    s.inputs = 4;
    s.hidden = 5;
    s.outputs = 3;
    return s;
}

// Rewards genomes whose outputs on a few fixed inputs approach a target.
FitnessFunction toy_fitness(const NetworkSpec& spec) {
    return {spec, [spec](const Genome& g) {
                double score = 0.0;
                const std::vector<std::vector<double>> inputs{{0, 0, 0, 0}, {1, 0, 1, 0}, {1, 1, 1, 1}, {0, 1, 0, 1}};
                for (std::size_t k = 0; k < inputs.size(); ++k) {
                    const auto out = forward(spec, g, inputs[k]);
                    for (double v : out) score -= (v - (k % 2 ? 0.9 : 0.1)) * (v - (k % 2 ? 0.9 : 0.1));
                }
                return score;
            }};
}

EvolutionConfig small_config(std::uint64_t seed) {
    EvolutionConfig c;
    c.popSize = 20;
    c.seed = seed;
    return c;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("iotagent_evolution_" + name)).string();
}

}  // namespace

TEST(InitPopulation, SizesAndDeterminism) {
    EvolutionConfig c;
    c.seed = 42;
    const auto a = init_population(spec435(), c);
    EXPECT_EQ(a, init_population(spec435(), c));
    ASSERT_EQ(a.population.size(), 50u);
    for (const auto& ind : a.population) {
        EXPECT_EQ(ind.genome.flat().size(), 35u);
        EXPECT_FALSE(ind.fitness.has_value());
        EXPECT_TRUE(deselected_inputs(ind.genome).empty());
    }
    EXPECT_EQ(a.generation, 0);
    c.seed = 43;
    EXPECT_NE(a.population, init_population(spec435(), c).population);
}

TEST(EvolveStep, BestIsNonDecreasing) {
    const auto fn = toy_fitness(spec435());
    auto st = init_population(spec435(), small_config(3));
    st = resume(st, fn, 25, 1);
    ASSERT_EQ(st.history.size(), 25u);
    for (std::size_t i = 1; i < st.history.size(); ++i) EXPECT_GE(st.history[i].best, st.history[i - 1].best);
    EXPECT_NO_THROW(check_invariants(st));
}

TEST(EvolveStep, ConstantFitness) {
    const FitnessFunction zero{spec435(), [](const Genome&) { return 0.0; }};
    auto st = resume(init_population(spec435(), small_config(1)), zero, 5, 1);
    for (const auto& h : st.history) {
        EXPECT_EQ(h.best, 0.0);
        EXPECT_EQ(h.mean, 0.0);
    }
    EXPECT_EQ(st.population.size(), 20u);
}

TEST(EvolveStep, ShrinkingToyConvergesTowardZero) {
    const FitnessFunction neg{spec435(), [](const Genome& g) {
                                  double s = 0.0;
                                  g.forEachWeight([&](double w) { s -= w * w; });
                                  return s;
                              }};
    EvolutionConfig c;
    c.seed = 7;
    auto st = resume(init_population(spec435(), c), neg, 30, 1);
    EXPECT_GE(st.history.back().best, st.history.front().best);
    EXPECT_LT(effective_topology(st.bestGenome).liveConnections, 35);
}

TEST(EvolveStep, WorkersDoNotChangeResults) {
    const auto fn = toy_fitness(spec435());
    const auto st = init_population(spec435(), small_config(5));
    EXPECT_EQ(resume(st, fn, 6, 1), resume(st, fn, 6, 4));
}

TEST(EvolveStep, InvariantsHoldEveryGeneration) {
    const auto fn = toy_fitness(spec435());
    auto st = init_population(spec435(), small_config(9));
    for (int g = 0; g < 15; ++g) {
        st = evolve_step(st, fn, 1);
        ASSERT_NO_THROW(check_invariants(st));
        for (const auto& ind : st.population) ASSERT_TRUE(ind.genome.matches(st.spec));
    }
}

TEST(EvolveStep, EvaluatorErrorLeavesStateUntouched) {
    const FitnessFunction bad{spec435(), [](const Genome&) -> double { throw std::runtime_error("boom"); }};
    const auto st = init_population(spec435(), small_config(2));
    const auto copy = st;
    EXPECT_THROW(evolve_step(st, bad, 2), std::runtime_error);
    EXPECT_EQ(st, copy);
}

TEST(EvolveStep, SpecMismatchThrows) {
    auto other = spec435();
    other.hidden = 2;
    const auto st = init_population(spec435(), small_config(2));
    EXPECT_THROW(evolve_step(st, toy_fitness(other), 1), ValidationError);
}

TEST(Resume, SplitRunMatchesSingleRun) {
    const auto fn = toy_fitness(spec435());
    const auto st = init_population(spec435(), small_config(12));
    const auto whole = resume(st, fn, 20, 1);
    const auto split = resume(resume(st, fn, 10, 1), fn, 10, 1);
    EXPECT_EQ(whole.history, split.history);
    EXPECT_EQ(whole.bestGenome, split.bestGenome);
    EXPECT_EQ(whole, split);
    EXPECT_EQ(resume(whole, fn, 0, 1), whole);
}

TEST(Checkpoint, FileRoundTripResumesIdentically) {
    const auto fn = toy_fitness(spec435());
    const auto half = resume(init_population(spec435(), small_config(21)), fn, 8, 1);
    const auto path = temp_path("ckpt.json");
    save_checkpoint(half, path);
    const auto loaded = load_checkpoint(path);
    EXPECT_EQ(loaded, half);
    EXPECT_EQ(resume(loaded, fn, 8, 1), resume(half, fn, 8, 1));
    std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptAndFutureFilesAreRejected) {
    const auto st = init_population(spec435(), small_config(1));
    const auto path = temp_path("bad.json");
    const std::string text = canonical_text(to_json(st));
    write_text_file(path, text.substr(0, text.size() / 2));
    EXPECT_THROW(load_checkpoint(path), CorruptFileError);

    auto j = to_json(st);
    j["version"] = 99;
    write_json_file(path, j);
    EXPECT_THROW(load_checkpoint(path), VersionError);

    j = to_json(st);
    j["population"][0]["weights"] = nlohmann::json::array({1.0});
    write_json_file(path, j);
    EXPECT_THROW(load_checkpoint(path), CorruptFileError);

    EXPECT_THROW(load_checkpoint(temp_path("missing.json")), IoError);
    std::filesystem::remove(path);
}

TEST(EvolutionConfigCheck, RejectsInvalid) {
    EvolutionConfig c;
    c.elitism = 0;
    EXPECT_THROW(c.check(), ValidationError);
    c = {};
    c.tournamentK = 1;
    EXPECT_THROW(c.check(), ValidationError);
    c = {};
    c.mutationRate = 1.5;
    EXPECT_THROW(c.check(), ValidationError);
}

TEST(DeriveSeed, DistinctStreams) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}
