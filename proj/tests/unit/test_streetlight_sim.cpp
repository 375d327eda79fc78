#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "iotagent/errors.hpp"
#include "iotagent/streetlight_sim.hpp"
#include "oracles.hpp"

using namespace iotagent;

namespace {

WorldConfig small_world(int T, double ambient, std::vector<Pedestrian> people = {}) {
    WorldConfig w;
    w.timeSimulation = T;
    w.ambientSchedule = constant_schedule(T, ambient);
    w.people = std::move(people);
    return w;
}

// One light input, one hidden unit, linear outputs: in daylight the lamp
// emits exactly the given hidden->output weights.
Policy daylight_policy(double listening, double tx, double light) {
    NetworkSpec s;
    s.inputs = 1;
    s.hidden = 1;
    s.outputs = 3;
    s.activation = ActivationKind::Linear;
    const Genome g(1, 1, 3, {1.0}, {listening, tx, light});
    return NetworkPolicy(s, g, IoLayout::from_names({"light"}, {"listeningDecision", "wirelessTransmitter", "lightDecision"}));
}

SimStats stats(int completed, int total, double energy, double trip, int T, int L) {
    return {completed, total, energy, trip, T, L};
}

}  // namespace

TEST(FitnessReport, CompletionPercentage) {
    EXPECT_NEAR(fitness_report(stats(3, 4, 0, 0, 100, 10)).pPeople, 75.0, 1e-9);
}

TEST(FitnessReport, MaximalEnergyIsHundred) {
    EXPECT_NEAR(fitness_report(stats(0, 1, 1.1 * 100 * 10, 0, 100, 10)).pEnergy, 100.0, 1e-9);
}

TEST(FitnessReport, TripPercentage) {
    EXPECT_NEAR(fitness_report(stats(4, 4, 0, 600, 100, 10)).pTrip, 100.0, 1e-9);
}

TEST(FitnessReport, WeightedCombination) {
    // 4 of 5 people, trips 375 of 750, energy 440 of 1100
    const auto r = fitness_report(stats(4, 5, 440, 375, 100, 10));
    EXPECT_NEAR(r.pPeople, 80.0, 1e-9);
    EXPECT_NEAR(r.pTrip, 50.0, 1e-9);
    EXPECT_NEAR(r.pEnergy, 40.0, 1e-9);
    EXPECT_NEAR(r.fitness, 34.0, 1e-9);
}

TEST(FitnessReport, NoPeopleIsVacuousSuccess) {
    const auto r = fitness_report(stats(0, 0, 0, 0, 100, 10));
    EXPECT_EQ(r.pPeople, 100.0);
    EXPECT_EQ(r.pTrip, 0.0);
    EXPECT_THROW(fitness_report(stats(0, 0, 0, 0, 0, 10)), ValidationError);
    EXPECT_THROW(fitness_report(stats(0, 0, 0, 0, 100, 0)), ValidationError);
}

TEST(DecodeOutputs, Examples) {
    EXPECT_EQ(decode_outputs(std::vector<double>{0.5, 0.5, 0.5}), (LampAction{1, 0.5, LightCommand::Dim}));
    EXPECT_EQ(decode_outputs(std::vector<double>{0.0, 0.0, 0.0}), (LampAction{0, 0.0, LightCommand::Off}));
    EXPECT_EQ(decode_outputs(std::vector<double>{1.0, 1.0, 1.0}), (LampAction{1, 1.0, LightCommand::On}));
}

TEST(Sense, BrightEmptyStreet) {
    Simulation sim(small_world(10, 1.0));
    EXPECT_EQ(sim.sense(0), (SensorFrame{1.0, 0.0, 0.0, 1.0}));
}

TEST(Sense, PersonAtLampTriggersMotion) {
    WorldConfig w = small_world(10, 1.0);
    const int cell = w.lampCell(2);
    w.people = {{0, cell - 1, cell + 5}};
    w.motionRange = 0;
    Simulation sim(w);
    EXPECT_EQ(sim.sense(2).motion, 0.0);
    sim.tick(baseline_policy(BaselineKind::AlwaysOff));
    ASSERT_EQ(sim.state().people[0].position, cell);
    EXPECT_EQ(sim.sense(2).motion, 1.0);
    EXPECT_EQ(sim.sense(3).motion, 0.0);
}

TEST(Sense, ClosedReceiverHearsNothing) {
    Simulation closed(small_world(10, 1.0));
    closed.tick(daylight_policy(0.0, 0.8, 0.0));
    EXPECT_EQ(closed.state().lamps[0].txValue, 0.8);
    EXPECT_EQ(closed.sense(1).prevListening, 0.0);
    EXPECT_EQ(closed.sense(1).received, 0.0);

    Simulation open(small_world(10, 1.0));
    open.tick(daylight_policy(1.0, 0.8, 0.0));
    EXPECT_EQ(open.sense(1).received, 0.8);
}

TEST(Movement, DaylightIsFullSpeedDarknessHalfSpeed) {
    const std::vector<Pedestrian> one{{0, 0, 40}};
    Simulation bright(small_world(10, 1.0, one));
    Simulation dark(small_world(10, 0.0, one));
    for (int t = 0; t < 10; ++t) {
        bright.tick(baseline_policy(BaselineKind::AlwaysOff));
        dark.tick(baseline_policy(BaselineKind::AlwaysOff));
    }
    EXPECT_EQ(bright.state().people[0].position, 10);
    EXPECT_EQ(dark.state().people[0].position, 5);
}

TEST(Movement, LitLampRestoresFullSpeed) {
    Simulation sim(small_world(10, 0.0, {{0, 0, 40}}));
    for (int t = 0; t < 10; ++t) sim.tick(baseline_policy(BaselineKind::AlwaysOn));
    // lamps light cells within radius 1 of their centers; elsewhere it is dark
    EXPECT_GT(sim.state().people[0].position, 5);
}

TEST(Energy, OneLampOnWithTransmitter) {
    WorldConfig w = small_world(1, 1.0);
    w.totalSmartLights = 1;
    w.cells = 2;
    const auto s = run_episode(w, daylight_policy(1.0, 1.0, 1.0));
    EXPECT_NEAR(s.totalEnergy, 1.1, 1e-12);
}

TEST(Episode, ShortTripCompletes) {
    const auto s = run_episode(small_world(10, 1.0, {{0, 3, 8}}), baseline_policy(BaselineKind::AlwaysOff));
    EXPECT_EQ(s.completedPeople, 1);
    EXPECT_EQ(s.totalTimeTrip, 5.0);
}

TEST(Episode, OpenTripsCountUntilHorizon) {
    const auto s = run_episode(small_world(10, 0.0, {{2, 0, 40}}), baseline_policy(BaselineKind::AlwaysOff));
    EXPECT_EQ(s.completedPeople, 0);
    EXPECT_EQ(s.totalTimeTrip, 8.0);
}

TEST(Episode, Deterministic) {
    const auto w = reference_world(4);
    std::mt19937_64 rng(1);
    NetworkSpec spec;
    spec.inputs = 4;
    spec.hidden = 5;
    spec.outputs = 3;
    const Genome g = random_genome(spec, rng);
    EXPECT_EQ(run_episode(w, spec, g), run_episode(w, spec, g));
}

TEST(Baselines, AlwaysOnEnergy) {
    const auto s = run_episode(small_world(100, 1.0), baseline_policy(BaselineKind::AlwaysOn));
    EXPECT_EQ(s.totalEnergy, 1000.0);
    EXPECT_NEAR(fitness_report(s).pEnergy, 1000.0 * 100 / 1100, 1e-9);
}

TEST(Baselines, AlwaysOffDarkIsHalfSpeedBrightIsFree) {
    const auto dark = run_episode(small_world(100, 0.0, {{0, 0, 49}}), baseline_policy(BaselineKind::AlwaysOff));
    EXPECT_EQ(dark.totalTimeTrip, 97.0);  // 49 moves, one per even tick
    const auto bright = run_episode(small_world(100, 1.0, {{0, 0, 49}}), baseline_policy(BaselineKind::AlwaysOff));
    EXPECT_EQ(bright.totalTimeTrip, 49.0);
    EXPECT_EQ(fitness_report(bright).pEnergy, 0.0);
}

TEST(Properties, BoundsHoldForRandomGenomes) {
    NetworkSpec spec;
    spec.inputs = 4;
    spec.hidden = 5;
    spec.outputs = 3;
    std::mt19937_64 rng(77);
    for (int k = 0; k < 20; ++k) {
        WorldConfig w = reference_world(static_cast<std::uint64_t>(k));
        w.ambientSchedule = alternating_schedule(w.timeSimulation, 50, k % 2 == 0);
        spec.activation = static_cast<ActivationKind>(k % 3);
        const Genome g = prune(spec, oracle::raw_genome(spec, rng));
        const auto s = run_episode(w, spec, g);
        EXPECT_LE(s.totalEnergy, 1.1 * w.timeSimulation * w.totalSmartLights + 1e-9);
        EXPECT_LE(s.totalTimeTrip, static_cast<double>(w.timeSimulation) * s.totalPeople);
        EXPECT_LE(s.completedPeople, s.totalPeople);
        const auto r = fitness_report(s);
        EXPECT_GE(r.pEnergy, 0.0);
        EXPECT_LE(r.pEnergy, 100.0 + 1e-9);
        EXPECT_GE(r.pTrip, 0.0);
        EXPECT_LE(r.pTrip, 200.0 / 3.0 + 1e-9);
    }
}

TEST(Properties, MoreAmbientNeverHurtsAlwaysOff) {
    const auto base = reference_world(9);
    SimStats prev{};
    bool first = true;
    for (double level : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        WorldConfig w = base;
        w.ambientSchedule = constant_schedule(w.timeSimulation, level);
        const auto s = run_episode(w, baseline_policy(BaselineKind::AlwaysOff));
        if (!first) {
            EXPECT_GE(s.completedPeople, prev.completedPeople);
            EXPECT_LE(s.totalTimeTrip, prev.totalTimeTrip);
        }
        prev = s;
        first = false;
    }
}

TEST(Properties, SensorFramesStayInRange) {
    NetworkSpec spec;
    spec.inputs = 4;
    spec.hidden = 5;
    spec.outputs = 3;
    std::mt19937_64 rng(12);
    WorldConfig w = reference_world(3);
    w.ambientSchedule = alternating_schedule(w.timeSimulation, 50);
    Simulation sim(w);
    const Policy p = NetworkPolicy(spec, random_genome(spec, rng));
    while (!sim.finished()) {
        for (int i = 0; i < w.totalSmartLights; ++i) {
            const auto f = sim.sense(i);
            ASSERT_TRUE(f.ambient >= 0.0 && f.ambient <= 1.0);
            ASSERT_TRUE(f.motion == 0.0 || f.motion == 1.0);
            ASSERT_TRUE(f.received >= 0.0 && f.received <= 1.0);
            ASSERT_TRUE(f.prevListening == 0.0 || f.prevListening == 1.0);
        }
        sim.tick(p);
    }
}

TEST(World, LampCellsAreSegmentCenters) {
    WorldConfig w;
    EXPECT_EQ(w.lampCell(0), 2);
    EXPECT_EQ(w.lampCell(9), 47);
}

TEST(World, ScheduleChecks) {
    EXPECT_NO_THROW(check_schedule(alternating_schedule(500, 50), 500));
    EXPECT_THROW(check_schedule({{100, 1.0}}, 500), ValidationError);
    EXPECT_THROW(check_schedule({{300, 1.0}, {200, 0.0}, {500, 0.0}}, 500), ValidationError);
    EXPECT_THROW(check_schedule({{500, 1.5}}, 500), ValidationError);
    const auto alt = alternating_schedule(500, 50);
    ASSERT_EQ(alt.size(), 10u);
    WorldConfig w;
    w.ambientSchedule = alt;
    EXPECT_EQ(w.ambientAt(0), 1.0);
    EXPECT_EQ(w.ambientAt(50), 0.0);
    EXPECT_EQ(w.ambientAt(499), 0.0);
}

TEST(World, ReferenceWorldRoutesFitTheHorizon) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto w = reference_world(seed);
        EXPECT_NO_THROW(w.check());
        ASSERT_EQ(w.people.size(), 20u);
        for (const auto& p : w.people) EXPECT_LE(p.spawnTick + std::abs(p.destCell - p.startCell), w.timeSimulation);
        EXPECT_EQ(run_episode(w, baseline_policy(BaselineKind::AlwaysOff)).completedPeople, 20);
    }
    EXPECT_EQ(reference_world(3), reference_world(3));
    EXPECT_NE(reference_world(3).people, reference_world(4).people);
}

TEST(World, JsonRoundTrip) {
    WorldConfig w = reference_world(6);
    w.ambientSchedule = alternating_schedule(500, 50, false);
    const auto j = nlohmann::json::parse(to_json(w).dump());
    EXPECT_EQ(world_config_from_json(j), w);
    EXPECT_THROW(ambient_schedule_from_json(nlohmann::json::parse("[[10]]")), ValidationError);
}

TEST(World, InvalidConfigNamesField) {
    WorldConfig w = small_world(10, 1.0, {{0, 0, 70}});
    try {
        w.check();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(e.path().find("people"), std::string::npos);
    }
}

TEST(Trace, CsvHasOneRowPerLampTick) {
    std::ostringstream out;
    write_trace_csv(out, small_world(3, 1.0), baseline_policy(BaselineKind::AlwaysOn));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "tick,lampIdx,cmd,listening,tx,energyCum");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 30);
}

TEST(CountCommands, BrightTicksOnly) {
    WorldConfig w = small_world(100, 1.0);
    w.ambientSchedule = alternating_schedule(100, 50);
    const auto c = count_commands(w, baseline_policy(BaselineKind::AlwaysOn), 1.0);
    EXPECT_EQ(c.lampTicks, 500);
    EXPECT_EQ(c.on, 500);
}
