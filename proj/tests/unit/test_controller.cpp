#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "iotagent/controller.hpp"
#include "iotagent/errors.hpp"
#include "iotagent/json_io.hpp"

using namespace iotagent;

namespace {

WorldConfig tiny_world() {
    WorldConfig w;
    w.timeSimulation = 100;
    w.ambientSchedule = constant_schedule(100, 1.0);
    w.people = {{0, 0, 20}, {10, 40, 15}, {30, 5, 30}, {50, 49, 20}};
    return w;
}

EvolutionConfig tiny_evo(std::uint64_t seed = 1) {
    EvolutionConfig c;
    c.popSize = 10;
    c.seed = seed;
    return c;
}

Experiment tiny_experiment(std::uint64_t seed = 1) {
    return create_experiment(smart_light_model(), smart_light_default_config(), tiny_world(), tiny_evo(seed), "t");
}

Experiment with_history(std::vector<double> bests) {
    Experiment e = tiny_experiment();
    for (double b : bests) e.evolution.history.push_back({b, b / 2});
    e.evolution.generation = static_cast<int>(bests.size());
    if (!bests.empty()) e.evolution.bestFitness = *std::max_element(bests.begin(), bests.end());
    return e;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("iotagent_controller_" + name)).string();
}

}  // namespace

TEST(CreateExperiment, ExpertConfig) {
    const auto e = tiny_experiment();
    EXPECT_EQ(e.spec.inputs, 4);
    EXPECT_EQ(e.spec.hidden, 5);
    EXPECT_EQ(e.spec.outputs, 3);
    EXPECT_EQ(e.spec.activation, ActivationKind::Sigmoid);
    ASSERT_EQ(e.phaseLog.size(), 1u);
    EXPECT_EQ(e.phaseLog[0].reason, PhaseReason::Initial);
    EXPECT_EQ(e.evolution.population.size(), 10u);
    EXPECT_NO_THROW(check_invariants(e));
}

TEST(CreateExperiment, InvalidConfigIsRejected) {
    auto c = smart_light_default_config();
    c.selected.insert("linear");
    EXPECT_THROW(create_experiment(smart_light_model(), c, tiny_world(), tiny_evo()), ValidationError);
}

TEST(CreateExperiment, SameSeedSamePopulation) {
    EXPECT_EQ(tiny_experiment(5).evolution, tiny_experiment(5).evolution);
    EXPECT_NE(tiny_experiment(5).evolution.population, tiny_experiment(6).evolution.population);
}

TEST(Train, ReportsEachGeneration) {
    std::vector<GenerationReport> seen;
    const auto e = train(tiny_experiment(), 3, [&](const GenerationReport& r) { seen.push_back(r); }, 1);
    ASSERT_EQ(seen.size(), 3u);
    EXPECT_EQ(seen[2].generation, 3);
    EXPECT_EQ(seen[2].best, e.evolution.history[2].best);
    EXPECT_EQ(e.generation(), 3);
    EXPECT_NO_THROW(check_invariants(e));
}

TEST(EvaluateFeedback, Examples) {
    EXPECT_EQ(evaluate_feedback(with_history({72})).kind, VerdictKind::UnderTarget);
    const auto d = evaluate_feedback(with_history({80, 55}));
    EXPECT_EQ(d.kind, VerdictKind::Degraded);
    EXPECT_EQ(d.recentDrop, 25.0);
    EXPECT_EQ(evaluate_feedback(with_history({90})).kind, VerdictKind::Satisfied);
    EXPECT_EQ(evaluate_feedback(with_history({75})).kind, VerdictKind::Satisfied);
    EXPECT_THROW(evaluate_feedback(tiny_experiment()), Error);
}

TEST(EvaluateFeedback, DropsOutsideTheWindowAreIgnored) {
    // drop happened 7 generations ago; window 5 looks at the last 6 values
    auto v = evaluate_feedback(with_history({80, 50, 51, 52, 53, 54, 55, 56}));
    EXPECT_EQ(v.kind, VerdictKind::UnderTarget);
    v = evaluate_feedback(with_history({80, 50, 51, 52, 53, 54, 55, 56}), {75, 15, 7});
    EXPECT_EQ(v.kind, VerdictKind::Degraded);
}

TEST(EvaluateFeedback, SoundnessOnRandomHistories) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-20, 100);
    const FeedbackPolicy policy;
    for (int k = 0; k < 300; ++k) {
        std::vector<double> h(static_cast<std::size_t>(1 + k % 9));
        for (auto& x : h) x = u(rng);
        const auto v = evaluate_feedback(with_history(h), policy);
        EXPECT_EQ(v.kind == VerdictKind::Satisfied, h.back() >= policy.targetFitness);
        if (v.kind == VerdictKind::Degraded) EXPECT_GE(v.recentDrop, policy.degradeDrop);
        EXPECT_EQ(v.bestFitness, h.back());
    }
    EXPECT_THROW(evaluate_feedback(with_history({1}), {75, 15, 0}), ValidationError);
}

TEST(Reconfiguration, ActivationSwapStartsNewPhase) {
    const auto before = train(tiny_experiment(), 4, {}, 1);
    const auto cfg = with_alternative(before.model, before.featureConfig, "activation", "binaryThreshold");
    const auto after = apply_reconfiguration(before, cfg, PhaseReason::Manual);
    EXPECT_EQ(after.spec.activation, ActivationKind::BinaryThreshold);
    ASSERT_EQ(after.phaseLog.size(), 2u);
    EXPECT_EQ(after.phaseLog[1].reason, PhaseReason::Manual);
    EXPECT_EQ(after.phaseLog[1].startedAt, 4);
    ASSERT_TRUE(after.phaseLog[1].diff.has_value());
    EXPECT_EQ(after.phaseLog[1].diff->changedGroups.count("activation"), 1u);
    EXPECT_EQ(after.history(), before.history());
    EXPECT_TRUE(after.evolution.history.empty());
    EXPECT_NE(after.evolution.population, before.evolution.population);
    for (const auto& ind : after.evolution.population) EXPECT_FALSE(ind.fitness);
    EXPECT_NO_THROW(check_invariants(after));

    const auto more = train(after, 2, {}, 1);
    EXPECT_EQ(more.generation(), 6);
    EXPECT_EQ(more.history().size(), 6u);
}

TEST(Reconfiguration, HiddenMaxTwo) {
    const auto e = tiny_experiment();
    const auto r = apply_reconfiguration(e, with_alternative(e.model, e.featureConfig, "hiddenMax", "two"),
                                         PhaseReason::Auto);
    EXPECT_EQ(r.spec.hidden, 2);
    EXPECT_EQ(r.evolution.population.front().genome.hidden(), 2);
}

TEST(Reconfiguration, RejectsNoOpInvalidAndBadReason) {
    const auto e = tiny_experiment();
    EXPECT_THROW(apply_reconfiguration(e, e.featureConfig, PhaseReason::Manual), ValidationError);
    auto bad = e.featureConfig;
    bad.selected.erase("sigmoid");
    EXPECT_THROW(apply_reconfiguration(e, bad, PhaseReason::Manual), ValidationError);
    const auto cfg = with_alternative(e.model, e.featureConfig, "activation", "linear");
    EXPECT_THROW(apply_reconfiguration(e, cfg, PhaseReason::Environment), ValidationError);
    EXPECT_THROW(apply_reconfiguration(e, cfg, PhaseReason::Initial), ValidationError);
}

TEST(Reconfiguration, FeedbackIgnoresPreviousPhase) {
    auto e = with_history({90, 91});
    e = apply_reconfiguration(e, with_alternative(e.model, e.featureConfig, "activation", "linear"),
                              PhaseReason::Manual);
    e.evolution.history.push_back({40, 20});
    EXPECT_EQ(evaluate_feedback(e).kind, VerdictKind::UnderTarget);
}

TEST(ChangeEnvironment, KeepsGenomesDropsFitness) {
    const auto before = train(tiny_experiment(), 3, {}, 1);
    const auto sched = alternating_schedule(100, 50);
    const auto after = change_environment(before, sched);
    EXPECT_EQ(after.worldConfig.ambientSchedule, sched);
    ASSERT_EQ(after.evolution.population.size(), before.evolution.population.size());
    for (std::size_t i = 0; i < after.evolution.population.size(); ++i) {
        EXPECT_EQ(after.evolution.population[i].genome, before.evolution.population[i].genome);
        EXPECT_FALSE(after.evolution.population[i].fitness);
    }
    ASSERT_EQ(after.phaseLog.size(), 2u);
    EXPECT_EQ(after.phaseLog[1].reason, PhaseReason::Environment);
    EXPECT_EQ(after.evolution.history, before.evolution.history);
    EXPECT_NO_THROW(check_invariants(after));
    EXPECT_NO_THROW(check_invariants(train(after, 2, {}, 1)));
}

TEST(ChangeEnvironment, RejectsIdenticalAndMalformed) {
    const auto e = tiny_experiment();
    EXPECT_THROW(change_environment(e, e.worldConfig.ambientSchedule), ValidationError);
    EXPECT_THROW(change_environment(e, {{50, 1.0}}), ValidationError);
    EXPECT_THROW(change_environment(e, {{100, -0.5}}), ValidationError);
}

TEST(ChangeEnvironment, DropAcrossTheChangeIsDegraded) {
    auto e = with_history({80, 80});
    e = change_environment(e, alternating_schedule(100, 50));
    e.evolution.history.push_back({50, 30});
    ++e.evolution.generation;
    EXPECT_EQ(evaluate_feedback(e).kind, VerdictKind::Degraded);
}

TEST(AutoReconfigure, SixNeuralCandidates) {
    const auto cands = neural_candidates(smart_light_model(), smart_light_default_config());
    ASSERT_EQ(cands.size(), 6u);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& c : cands) {
        EXPECT_TRUE(validate(smart_light_model(), c.featureConfig).ok());
        seen.insert({c.choices.at("activation"), c.choices.at("hiddenMax")});
    }
    EXPECT_EQ(seen.size(), 6u);
    EXPECT_EQ(cands.front().choices.at("activation"), "sigmoid");
    EXPECT_EQ(cands.front().choices.at("hiddenMax"), "two");
}

TEST(AutoReconfigure, DeterministicAdoption) {
    const auto e = train(tiny_experiment(3), 2, {}, 1);
    const auto a = auto_reconfigure(e, FeatureDomain::Neural, 2, 1);
    const auto b = auto_reconfigure(e, FeatureDomain::Neural, 2, 1);
    ASSERT_EQ(a.candidates.size(), 6u);
    EXPECT_EQ(a.adopted, b.adopted);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(a.candidates[i].bestFitness, b.candidates[i].bestFitness);
    const auto& pick = a.candidates[a.adopted];
    for (const auto& c : a.candidates) {
        EXPECT_LE(c.bestFitness, pick.bestFitness);
        if (c.bestFitness == pick.bestFitness) EXPECT_GE(c.liveConnections, pick.liveConnections);
    }
    if (a.changed) {
        EXPECT_EQ(a.experiment.featureConfig, pick.featureConfig);
        EXPECT_EQ(a.experiment.phaseLog.back().reason, PhaseReason::Auto);
    } else {
        EXPECT_EQ(pick.featureConfig, e.featureConfig);
        EXPECT_EQ(a.experiment.phaseLog.size(), e.phaseLog.size());
    }
    EXPECT_NO_THROW(check_invariants(a.experiment));
}

TEST(AutoReconfigure, RejectsZeroBudgetAndOtherDomains) {
    const auto e = tiny_experiment();
    EXPECT_THROW(auto_reconfigure(e, FeatureDomain::Neural, 0, 1), ValidationError);
    EXPECT_THROW(auto_reconfigure(e, FeatureDomain::Body, 1, 1), ValidationError);
}

TEST(ExperimentFile, RoundTripResumesIdentically) {
    auto e = train(tiny_experiment(8), 3, {}, 1);
    e = apply_reconfiguration(e, with_alternative(e.model, e.featureConfig, "hiddenMax", "two"), PhaseReason::Manual);
    e = train(e, 2, {}, 1);
    e = change_environment(e, alternating_schedule(100, 25));
    e.verdicts.push_back(evaluate_feedback(e));
    const auto path = temp_path("exp.json");
    save_experiment(e, path);
    const auto loaded = load_experiment(path);
    EXPECT_EQ(to_json(loaded), to_json(e));
    EXPECT_EQ(loaded.phaseLog, e.phaseLog);
    EXPECT_EQ(to_json(train(loaded, 4, {}, 1)), to_json(train(e, 4, {}, 1)));
    std::filesystem::remove(path);
}

TEST(ExperimentFile, CorruptVersionAndInconsistentFiles) {
    const auto e = tiny_experiment();
    const auto path = temp_path("bad.json");
    const auto text = canonical_text(to_json(e));
    write_text_file(path, text.substr(0, text.size() - 40));
    EXPECT_THROW(load_experiment(path), CorruptFileError);

    auto j = to_json(e);
    j["version"] = 2;
    write_json_file(path, j);
    EXPECT_THROW(load_experiment(path), VersionError);

    j = to_json(e);
    j["format"] = "something-else";
    write_json_file(path, j);
    EXPECT_THROW(load_experiment(path), CorruptFileError);

    // a config that no longer matches the checkpointed network
    j = to_json(e);
    j["featureConfig"] = to_json(with_alternative(e.model, e.featureConfig, "hiddenMax", "two"));
    write_json_file(path, j);
    EXPECT_THROW(load_experiment(path), CorruptFileError);
    std::filesystem::remove(path);
}

TEST(Invariants, DetectBrokenPhaseConsistency) {
    auto e = tiny_experiment();
    e.spec.hidden = 2;
    EXPECT_THROW(check_invariants(e), ValidationError);
    e = tiny_experiment();
    e.phaseLog.clear();
    EXPECT_THROW(check_invariants(e), ValidationError);
    e = tiny_experiment();
    e.featureConfig = with_alternative(e.model, e.featureConfig, "activation", "linear");
    EXPECT_THROW(check_invariants(e), ValidationError);
}
