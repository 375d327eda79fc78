#include "iotagent/streetlight_sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "iotagent/errors.hpp"

namespace iotagent {

namespace {

double light_contribution(LightCommand cmd) {
    switch (cmd) {
    case LightCommand::On: return 1.0;
    case LightCommand::Dim: return 0.5;
    case LightCommand::Off: return 0.0;
    }
    return 0.0;
}

double light_cost(const EnergyCosts& costs, LightCommand cmd) {
    switch (cmd) {
    case LightCommand::On: return costs.on;
    case LightCommand::Dim: return costs.dim;
    case LightCommand::Off: return costs.off;
    }
    return 0.0;
}

}  // namespace

std::string to_string(LightCommand cmd) {
    switch (cmd) {
    case LightCommand::On: return "ON";
    case LightCommand::Dim: return "DIM";
    case LightCommand::Off: return "OFF";
    }
    return "OFF";
}

void check_schedule(const AmbientSchedule& schedule, int horizon) {
    if (schedule.empty()) throw ValidationError("must not be empty", "ambientSchedule");
    int prev = 0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& seg = schedule[i];
        const std::string path = "ambientSchedule[" + std::to_string(i) + "]";
        if (seg.untilTick <= prev) throw ValidationError("untilTick must be strictly increasing and positive", path);
        if (!(seg.level >= 0.0 && seg.level <= 1.0)) throw ValidationError("level must be within [0,1]", path);
        prev = seg.untilTick;
    }
    if (prev < horizon)
        throw ValidationError("segments end at tick " + std::to_string(prev) + " but the horizon is " +
                                  std::to_string(horizon),
                              "ambientSchedule");
}

void WorldConfig::check() const {
    if (totalSmartLights < 1) throw ValidationError("must be positive", "totalSmartLights");
    if (cells < totalSmartLights) throw ValidationError("must be at least totalSmartLights", "cells");
    if (timeSimulation < 1) throw ValidationError("must be positive", "timeSimulation");
    for (std::size_t i = 0; i < people.size(); ++i) {
        const auto& p = people[i];
        const std::string path = "people[" + std::to_string(i) + "]";
        if (p.spawnTick < 0 || p.spawnTick >= timeSimulation)
            throw ValidationError("spawnTick must be within [0, timeSimulation)", path);
        if (p.startCell < 0 || p.startCell >= cells || p.destCell < 0 || p.destCell >= cells)
            throw ValidationError("cells must be within [0, cells)", path);
        if (p.startCell == p.destCell) throw ValidationError("start and destination must differ", path);
    }
    check_schedule(ambientSchedule, timeSimulation);
    if (!(comfortThreshold >= 0.0 && comfortThreshold <= 1.0))
        throw ValidationError("must be within [0,1]", "comfortThreshold");
    if (lightRadius < 0 || motionRange < 0 || neighborRadius < 0)
        throw ValidationError("radii must not be negative", "lightRadius/motionRange/neighborRadius");
    const auto& c = energyCosts;
    if (!(c.off >= 0.0 && c.dim >= c.off && c.on >= c.dim && c.tx >= 0.0))
        throw ValidationError("requires 0 <= off <= dim <= on and tx >= 0", "energyCosts");
    if (c.on + c.tx > 1.1 + 1e-12)
        throw ValidationError("on + tx must not exceed 1.1 per lamp-tick", "energyCosts");
}

int WorldConfig::lampCell(int idx) const noexcept { return ((2 * idx + 1) * cells) / (2 * totalSmartLights); }

double WorldConfig::ambientAt(int tick) const {
    for (const auto& seg : ambientSchedule)
        if (tick < seg.untilTick) return seg.level;
    return ambientSchedule.empty() ? 0.0 : ambientSchedule.back().level;
}

AmbientSchedule constant_schedule(int horizon, double level) { return {{horizon, level}}; }

AmbientSchedule alternating_schedule(int horizon, int period, bool brightFirst) {
    if (period < 1) throw ValidationError("must be positive", "period");
    AmbientSchedule s;
    bool bright = brightFirst;
    for (int t = 0; t < horizon; t += period) {
        s.push_back({std::min(t + period, horizon), bright ? 1.0 : 0.0});
        bright = !bright;
    }
    return s;
}

std::vector<Pedestrian> generate_pedestrians(const PedestrianProfile& profile, int cells, int horizon,
                                             std::uint64_t seed) {
    if (profile.minDistance < 1 || profile.maxDistance < profile.minDistance || profile.maxDistance >= cells)
        throw ValidationError("requires 1 <= minDistance <= maxDistance < cells", "profile");
    std::mt19937_64 rng(seed);
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::vector<Pedestrian> people;
    people.reserve(static_cast<std::size_t>(profile.count));
    for (int i = 0; i < profile.count; ++i) {
        const int distance = uniform(profile.minDistance, profile.maxDistance);
        const int start = uniform(0, cells - 1 - distance);
        const bool eastbound = uniform(0, 1) == 1;
        const int latest = std::min(profile.spawnUntil, horizon - distance - 1);
        const int earliest = std::clamp(profile.spawnFrom, 0, std::max(0, latest));
        const int spawn = uniform(earliest, std::max(earliest, latest));
        people.push_back(eastbound ? Pedestrian{spawn, start, start + distance}
                                   : Pedestrian{spawn, start + distance, start});
    }
    return people;
}

WorldConfig reference_world(std::uint64_t seed, int people) {
    WorldConfig w;
    w.totalSmartLights = 10;
    w.cells = 50;
    w.timeSimulation = 500;
    w.ambientSchedule = constant_schedule(w.timeSimulation, 1.0);
    w.episodeSeed = seed;
    PedestrianProfile profile;
    profile.count = people;
    profile.minDistance = 30;
    profile.maxDistance = 45;
    profile.spawnFrom = w.timeSimulation - 80;
    profile.spawnUntil = w.timeSimulation;
    w.people = generate_pedestrians(profile, w.cells, w.timeSimulation, seed);
    return w;
}

LampAction decode_outputs(std::span<const double> raw) {
    if (raw.size() != 3) throw ValidationError("expected 3 raw outputs", "raw");
    LampAction a;
    a.listening = raw[0] >= 0.5 ? 1 : 0;
    a.txValue = std::clamp(raw[1], 0.0, 1.0);
    const double l = raw[2];
    a.light = l < 1.0 / 3.0 ? LightCommand::Off : (l < 2.0 / 3.0 ? LightCommand::Dim : LightCommand::On);
    return a;
}

IoLayout IoLayout::from_names(const std::vector<std::string>& inputNames,
                              const std::vector<std::string>& outputNames) {
    IoLayout layout;
    for (const auto& n : inputNames) {
        if (n == "light") layout.inputs.push_back(SensorChannel::Light);
        else if (n == "motion") layout.inputs.push_back(SensorChannel::Motion);
        else if (n == "wirelessReceiver") layout.inputs.push_back(SensorChannel::Received);
        else if (n == "prevListening") layout.inputs.push_back(SensorChannel::PrevListening);
        else throw ValidationError("unknown input '" + n + "'", "inputNames");
    }
    for (std::size_t k = 0; k < outputNames.size(); ++k) {
        const auto& n = outputNames[k];
        const int idx = static_cast<int>(k);
        if (n == "listeningDecision") layout.listeningOutput = idx;
        else if (n == "wirelessTransmitter") layout.transmitterOutput = idx;
        else if (n == "lightDecision") layout.lightOutput = idx;
        else throw ValidationError("unknown output '" + n + "'", "outputNames");
    }
    layout.outputCount = static_cast<int>(outputNames.size());
    return layout;
}

IoLayout IoLayout::standard() {
    return from_names({"light", "motion", "wirelessReceiver", "prevListening"},
                      {"listeningDecision", "wirelessTransmitter", "lightDecision"});
}

NetworkPolicy::NetworkPolicy(NetworkSpec spec, Genome genome, IoLayout layout)
    : spec_(std::move(spec)), genome_(std::move(genome)), layout_(std::move(layout)) {
    if (!genome_.matches(spec_)) throw ValidationError("genome does not match spec", "genome");
    if (static_cast<int>(layout_.inputs.size()) != spec_.inputs || layout_.outputCount != spec_.outputs)
        throw ValidationError("io layout does not match spec", "layout");
}

LampAction NetworkPolicy::act(const SensorFrame& frame) const {
    double in[8];
    std::vector<double> inHeap;
    double* inputs = in;
    if (spec_.inputs > 8) {
        inHeap.resize(static_cast<std::size_t>(spec_.inputs));
        inputs = inHeap.data();
    }
    for (std::size_t i = 0; i < layout_.inputs.size(); ++i) {
        switch (layout_.inputs[i]) {
        case SensorChannel::Light: inputs[i] = frame.ambient; break;
        case SensorChannel::Motion: inputs[i] = frame.motion; break;
        case SensorChannel::Received: inputs[i] = frame.received; break;
        case SensorChannel::PrevListening: inputs[i] = frame.prevListening; break;
        }
    }
    double out[8];
    std::vector<double> outHeap;
    double* outputs = out;
    if (spec_.outputs > 8) {
        outHeap.resize(static_cast<std::size_t>(spec_.outputs));
        outputs = outHeap.data();
    }
    forward(spec_, genome_, {inputs, static_cast<std::size_t>(spec_.inputs)},
            {outputs, static_cast<std::size_t>(spec_.outputs)});

    // absent listening output: the receiver is always open
    const double raw[3] = {layout_.listeningOutput >= 0 ? outputs[layout_.listeningOutput] : 1.0,
                           layout_.transmitterOutput >= 0 ? outputs[layout_.transmitterOutput] : 0.0,
                           layout_.lightOutput >= 0 ? outputs[layout_.lightOutput] : 0.0};
    return decode_outputs(raw);
}

Policy baseline_policy(BaselineKind kind) { return kind; }

LampAction act(const Policy& policy, const SensorFrame& frame) {
    if (const auto* net = std::get_if<NetworkPolicy>(&policy)) return net->act(frame);
    const auto kind = std::get<BaselineKind>(policy);
    return {0, 0.0, kind == BaselineKind::AlwaysOn ? LightCommand::On : LightCommand::Off};
}

Simulation::Simulation(WorldConfig config) : config_(std::move(config)) {
    config_.check();
    state_.lamps.resize(static_cast<std::size_t>(config_.totalSmartLights));
    state_.people.resize(config_.people.size());
    for (int i = 0; i < config_.totalSmartLights; ++i) lampCells_.push_back(config_.lampCell(i));
}

SensorFrame Simulation::sense(int lampIdx) const {
    const auto& lamp = state_.lamps.at(static_cast<std::size_t>(lampIdx));
    SensorFrame f;
    f.ambient = config_.ambientAt(state_.tick);
    const int cell = lampCells_[static_cast<std::size_t>(lampIdx)];
    for (const auto& p : state_.people)
        if (p.active && std::abs(p.position - cell) <= config_.motionRange) {
            f.motion = 1.0;
            break;
        }
    if (lamp.listening == 1) {
        const int lo = std::max(0, lampIdx - config_.neighborRadius);
        const int hi = std::min(config_.totalSmartLights - 1, lampIdx + config_.neighborRadius);
        for (int j = lo; j <= hi; ++j)
            if (j != lampIdx) f.received = std::max(f.received, state_.lamps[static_cast<std::size_t>(j)].txValue);
    }
    f.prevListening = lamp.listening;
    return f;
}

double Simulation::lightLevel(int cell) const {
    double level = config_.ambientAt(state_.tick);
    for (std::size_t i = 0; i < lampCells_.size(); ++i)
        if (std::abs(lampCells_[i] - cell) <= config_.lightRadius) level += light_contribution(state_.lamps[i].light);
    return std::min(level, 1.0);
}

void Simulation::tick(const Policy& policy, const TickObserver& observer) {
    if (finished()) throw ValidationError("episode already finished", "tick");
    const int t = state_.tick;

    for (std::size_t k = 0; k < state_.people.size(); ++k) {
        auto& p = state_.people[k];
        if (!p.spawned && config_.people[k].spawnTick == t) {
            p.spawned = true;
            p.active = true;
            p.position = config_.people[k].startCell;
        }
    }

    // all lamps sense the previous tick's state before any lamp acts
    const std::size_t L = state_.lamps.size();
    std::vector<LampAction> actions(L);
    for (std::size_t i = 0; i < L; ++i) actions[i] = act(policy, sense(static_cast<int>(i)));

    for (std::size_t i = 0; i < L; ++i) {
        auto& lamp = state_.lamps[i];
        const auto& a = actions[i];
        lamp.prevListening = lamp.listening;
        lamp.listening = a.listening;
        lamp.txValue = a.txValue;
        lamp.light = a.light;
        state_.totalEnergy += light_cost(config_.energyCosts, a.light) + (a.txValue > 0.0 ? config_.energyCosts.tx : 0.0);
        if (observer) observer({t, static_cast<int>(i), a.light, a.listening, a.txValue, state_.totalEnergy});
    }

    const bool evenTick = t % 2 == 0;
    for (std::size_t k = 0; k < state_.people.size(); ++k) {
        auto& p = state_.people[k];
        if (!p.active) continue;
        const bool comfortable = lightLevel(p.position) >= config_.comfortThreshold;
        if (!comfortable && !evenTick) continue;
        const int dest = config_.people[k].destCell;
        p.position += dest > p.position ? 1 : -1;
        if (p.position == dest) {
            p.active = false;
            p.completedTick = t + 1;
            state_.completedPeople += 1;
            state_.totalTimeTrip += t + 1 - config_.people[k].spawnTick;
        }
    }
    state_.tick += 1;
}

SimStats Simulation::stats() const {
    SimStats s;
    s.completedPeople = state_.completedPeople;
    s.totalPeople = static_cast<int>(config_.people.size());
    s.totalEnergy = state_.totalEnergy;
    s.totalTimeTrip = state_.totalTimeTrip;
    for (std::size_t k = 0; k < state_.people.size(); ++k)
        if (!state_.people[k].completedTick) s.totalTimeTrip += config_.timeSimulation - config_.people[k].spawnTick;
    s.timeSimulation = config_.timeSimulation;
    s.totalSmartLights = config_.totalSmartLights;
    return s;
}

SimStats run_episode(const WorldConfig& config, const Policy& policy, const TickObserver& observer) {
    Simulation sim(config);
    while (!sim.finished()) sim.tick(policy, observer);
    return sim.stats();
}

SimStats run_episode(const WorldConfig& config, const NetworkSpec& spec, const Genome& genome) {
    return run_episode(config, Policy{NetworkPolicy(spec, genome)});
}

FitnessReport fitness_report(const SimStats& s) {
    if (s.timeSimulation <= 0) throw ValidationError("must be positive", "timeSimulation");
    if (s.totalSmartLights <= 0) throw ValidationError("must be positive", "totalSmartLights");
    FitnessReport r;
    const double T = s.timeSimulation;
    const double L = s.totalSmartLights;
    if (s.totalPeople > 0) {
        r.pPeople = (s.completedPeople * 100.0) / s.totalPeople;
        r.pTrip = (s.totalTimeTrip * 100.0) / (((3.0 * T) / 2.0) * s.totalPeople);
    } else {
        r.pPeople = 100.0;
        r.pTrip = 0.0;
    }
    r.pEnergy = (s.totalEnergy * 100.0) / ((11.0 * (T * L)) / 10.0);
    r.fitness = (1.0 * r.pPeople) - (0.6 * r.pTrip) - (0.4 * r.pEnergy);
    return r;
}

CommandCounts count_commands(const WorldConfig& config, const Policy& policy, double minAmbient) {
    CommandCounts c;
    run_episode(config, policy, [&](const LampTickRecord& r) {
        if (config.ambientAt(r.tick) < minAmbient) return;
        c.lampTicks += 1;
        switch (r.cmd) {
        case LightCommand::On: c.on += 1; break;
        case LightCommand::Dim: c.dim += 1; break;
        case LightCommand::Off: c.off += 1; break;
        }
    });
    return c;
}

void write_trace_csv(std::ostream& out, const WorldConfig& config, const Policy& policy) {
    out << "tick,lampIdx,cmd,listening,tx,energyCum\n";
    run_episode(config, policy, [&](const LampTickRecord& r) {
        out << r.tick << ',' << r.lampIdx << ',' << to_string(r.cmd) << ',' << r.listening << ',' << r.tx << ','
            << r.energyCum << '\n';
    });
}

nlohmann::json to_json(const AmbientSchedule& schedule) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : schedule) j.push_back({s.untilTick, s.level});
    return j;
}

AmbientSchedule ambient_schedule_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("must be an array of [untilTick, level] pairs", "ambientSchedule");
    AmbientSchedule s;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        const std::string path = "ambientSchedule[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
            throw ValidationError("must be an [untilTick, level] pair", path);
        s.push_back({e[0].get<int>(), e[1].get<double>()});
    }
    return s;
}

nlohmann::json to_json(const WorldConfig& w) {
    nlohmann::json people = nlohmann::json::array();
    for (const auto& p : w.people)
        people.push_back({{"spawnTick", p.spawnTick}, {"startCell", p.startCell}, {"destCell", p.destCell}});
    return {{"totalSmartLights", w.totalSmartLights},
            {"cells", w.cells},
            {"timeSimulation", w.timeSimulation},
            {"people", std::move(people)},
            {"ambientSchedule", to_json(w.ambientSchedule)},
            {"comfortThreshold", w.comfortThreshold},
            {"lightRadius", w.lightRadius},
            {"motionRange", w.motionRange},
            {"neighborRadius", w.neighborRadius},
            {"energyCosts",
             {{"on", w.energyCosts.on}, {"dim", w.energyCosts.dim}, {"off", w.energyCosts.off}, {"tx", w.energyCosts.tx}}},
            {"episodeSeed", w.episodeSeed}};
}

WorldConfig world_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("must be an object", "worldConfig");
    WorldConfig w;
    try {
        w.totalSmartLights = j.at("totalSmartLights").get<int>();
        w.cells = j.at("cells").get<int>();
        w.timeSimulation = j.at("timeSimulation").get<int>();
        for (const auto& p : j.value("people", nlohmann::json::array()))
            w.people.push_back({p.at("spawnTick").get<int>(), p.at("startCell").get<int>(), p.at("destCell").get<int>()});
        w.ambientSchedule = ambient_schedule_from_json(j.at("ambientSchedule"));
        w.comfortThreshold = j.value("comfortThreshold", w.comfortThreshold);
        w.lightRadius = j.value("lightRadius", w.lightRadius);
        w.motionRange = j.value("motionRange", w.motionRange);
        w.neighborRadius = j.value("neighborRadius", w.neighborRadius);
        if (auto it = j.find("energyCosts"); it != j.end()) {
            w.energyCosts.on = it->value("on", w.energyCosts.on);
            w.energyCosts.dim = it->value("dim", w.energyCosts.dim);
            w.energyCosts.off = it->value("off", w.energyCosts.off);
            w.energyCosts.tx = it->value("tx", w.energyCosts.tx);
        }
        w.episodeSeed = j.value("episodeSeed", w.episodeSeed);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(e.what(), "worldConfig");
    }
    w.check();
    return w;
}

nlohmann::json to_json(const SimStats& s) {
    return {{"completedPeople", s.completedPeople}, {"totalPeople", s.totalPeople},
            {"totalEnergy", s.totalEnergy},         {"totalTimeTrip", s.totalTimeTrip},
            {"timeSimulation", s.timeSimulation},   {"totalSmartLights", s.totalSmartLights}};
}

nlohmann::json to_json(const FitnessReport& r) {
    return {{"pPeople", r.pPeople}, {"pEnergy", r.pEnergy}, {"pTrip", r.pTrip}, {"fitness", r.fitness}};
}

}  // namespace iotagent
