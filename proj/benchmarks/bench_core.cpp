#include <random>

#include <benchmark/benchmark.h>

#include "iotagent/controller.hpp"

using namespace iotagent;

namespace {

NetworkSpec expert_spec() {
    return network_spec_from(derive_search_space(smart_light_model(), smart_light_default_config()));
}

void BM_Forward(benchmark::State& state) {
    const auto spec = expert_spec();
    std::mt19937_64 rng(1);
    const Genome g = random_genome(spec, rng);
    const std::vector<double> in{1.0, 0.0, 0.5, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(forward(spec, g, in));
}
BENCHMARK(BM_Forward);

void BM_RunEpisode(benchmark::State& state) {
    const auto spec = expert_spec();
    std::mt19937_64 rng(2);
    const Genome g = random_genome(spec, rng);
    const WorldConfig world = reference_world(1);
    for (auto _ : state) benchmark::DoNotOptimize(run_episode(world, spec, g));
    state.SetItemsProcessed(state.iterations() * world.timeSimulation * world.totalSmartLights);
}
BENCHMARK(BM_RunEpisode)->Unit(benchmark::kMillisecond);

void BM_EvolveStep(benchmark::State& state) {
    EvolutionConfig evo;
    evo.seed = 3;
    const Experiment e =
        create_experiment(smart_light_model(), smart_light_default_config(), reference_world(1), evo);
    const auto fn = make_fitness_function(e);
    const unsigned workers = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(evolve_step(e.evolution, fn, workers));
}
BENCHMARK(BM_EvolveStep)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
