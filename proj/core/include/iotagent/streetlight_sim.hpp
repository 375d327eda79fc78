#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "iotagent/neurogenome.hpp"

namespace iotagent {

enum class LightCommand { Off, Dim, On };

std::string to_string(LightCommand cmd);

struct Pedestrian {
    int spawnTick = 0;
    int startCell = 0;
    int destCell = 0;

    bool operator==(const Pedestrian&) const = default;
};

/// Ambient level applies to ticks before `untilTick` (and after the previous segment).
struct AmbientSegment {
    int untilTick = 0;
    double level = 1.0;

    bool operator==(const AmbientSegment&) const = default;
};

using AmbientSchedule = std::vector<AmbientSegment>;

struct EnergyCosts {
    double on = 1.0;
    double dim = 0.5;
    double off = 0.0;
    double tx = 0.1;

    bool operator==(const EnergyCosts&) const = default;
};

struct WorldConfig {
    int totalSmartLights = 10;
    int cells = 50;
    int timeSimulation = 500;
    std::vector<Pedestrian> people;
    AmbientSchedule ambientSchedule;
    double comfortThreshold = 0.5;
    int lightRadius = 1;
    int motionRange = 1;
    int neighborRadius = 1;
    EnergyCosts energyCosts;
    std::uint64_t episodeSeed = 0;

    bool operator==(const WorldConfig&) const = default;

    /// Throws ValidationError naming the offending field.
    void check() const;
    /// Cell of lamp `idx`; lamps sit at the centers of L equal street segments.
    int lampCell(int idx) const noexcept;
    double ambientAt(int tick) const;
};

/// Throws ValidationError unless the schedule is ordered, levels are in [0,1]
/// and the segments cover [0, horizon).
void check_schedule(const AmbientSchedule& schedule, int horizon);

AmbientSchedule constant_schedule(int horizon, double level);
/// Alternates bright (1.0) and dark (0.0) every `period` ticks.
AmbientSchedule alternating_schedule(int horizon, int period, bool brightFirst = true);

/// Desk-scale reference street: 10 lamps, 50 cells, 500 ticks, always bright,
/// `people` pedestrians generated from `seed`.
WorldConfig reference_world(std::uint64_t seed, int people = 20);

/// Pedestrians whose routes span [minDistance, maxDistance] cells and who
/// appear during [spawnFrom, spawnUntil] clipped so that a full-speed walk
/// ends before the horizon.
struct PedestrianProfile {
    int count = 20;
    int minDistance = 20;
    int maxDistance = 40;
    int spawnFrom = 0;
    int spawnUntil = 0;
};

std::vector<Pedestrian> generate_pedestrians(const PedestrianProfile& profile, int cells, int horizon,
                                             std::uint64_t seed);

struct SensorFrame {
    double ambient = 0.0;
    double motion = 0.0;
    double received = 0.0;
    double prevListening = 0.0;

    bool operator==(const SensorFrame&) const = default;
};

struct LampAction {
    int listening = 0;
    double txValue = 0.0;
    LightCommand light = LightCommand::Off;

    bool operator==(const LampAction&) const = default;
};

/// Maps raw [listening, transmitter, light] outputs to a lamp action.
LampAction decode_outputs(std::span<const double> raw);

enum class SensorChannel { Light, Motion, Received, PrevListening };

/// Which sensor feeds each network input and which network output drives
/// each actuator (-1 when the feature is absent).
struct IoLayout {
    std::vector<SensorChannel> inputs;
    int listeningOutput = -1;
    int transmitterOutput = -1;
    int lightOutput = -1;
    int outputCount = 0;

    static IoLayout from_names(const std::vector<std::string>& inputNames,
                               const std::vector<std::string>& outputNames);
    /// The full four-input, three-output smart light layout.
    static IoLayout standard();
};

class NetworkPolicy {
public:
    NetworkPolicy(NetworkSpec spec, Genome genome, IoLayout layout = IoLayout::standard());

    LampAction act(const SensorFrame& frame) const;

    const NetworkSpec& spec() const noexcept { return spec_; }
    const Genome& genome() const noexcept { return genome_; }

private:
    NetworkSpec spec_;
    Genome genome_;
    IoLayout layout_;
};

enum class BaselineKind { AlwaysOn, AlwaysOff };

using Policy = std::variant<NetworkPolicy, BaselineKind>;

Policy baseline_policy(BaselineKind kind);
LampAction act(const Policy& policy, const SensorFrame& frame);

struct LampState {
    LightCommand light = LightCommand::Off;
    int listening = 1;  // decision of the previous tick; starts open so communication can bootstrap
    double txValue = 0.0;
    int prevListening = 1;

    bool operator==(const LampState&) const = default;
};

struct PersonState {
    int position = 0;
    bool spawned = false;
    bool active = false;
    std::optional<int> completedTick;

    bool operator==(const PersonState&) const = default;
};

struct WorldState {
    int tick = 0;
    std::vector<LampState> lamps;
    std::vector<PersonState> people;
    double totalEnergy = 0.0;
    double totalTimeTrip = 0.0;  // completed trips only; open trips are added by stats()
    int completedPeople = 0;

    bool operator==(const WorldState&) const = default;
};

struct SimStats {
    int completedPeople = 0;
    int totalPeople = 0;
    double totalEnergy = 0.0;
    double totalTimeTrip = 0.0;
    int timeSimulation = 0;
    int totalSmartLights = 0;

    bool operator==(const SimStats&) const = default;
};

struct FitnessReport {
    double pPeople = 0.0;
    double pEnergy = 0.0;
    double pTrip = 0.0;
    double fitness = 0.0;
};

struct LampTickRecord {
    int tick = 0;
    int lampIdx = 0;
    LightCommand cmd = LightCommand::Off;
    int listening = 0;
    double tx = 0.0;
    double energyCum = 0.0;
};

using TickObserver = std::function<void(const LampTickRecord&)>;

/// One episode in progress. Strictly sequential; independent instances can
/// run in parallel.
class Simulation {
public:
    explicit Simulation(WorldConfig config);

    const WorldConfig& config() const noexcept { return config_; }
    const WorldState& state() const noexcept { return state_; }
    bool finished() const noexcept { return state_.tick >= config_.timeSimulation; }

    SensorFrame sense(int lampIdx) const;
    /// Light reaching `cell` this tick given the lamps' current commands.
    double lightLevel(int cell) const;
    void tick(const Policy& policy, const TickObserver& observer = {});
    /// Accumulators as if the episode ended now (open trips count up to the horizon).
    SimStats stats() const;

private:
    WorldConfig config_;
    WorldState state_;
    std::vector<int> lampCells_;
};

SimStats run_episode(const WorldConfig& config, const Policy& policy, const TickObserver& observer = {});
SimStats run_episode(const WorldConfig& config, const NetworkSpec& spec, const Genome& genome);

/// Throws ValidationError for zero timeSimulation or totalSmartLights.
/// totalPeople == 0 gives pPeople = 100 and pTrip = 0.
FitnessReport fitness_report(const SimStats& stats);

/// Fraction of lamp-ticks with the given command, over ticks whose ambient
/// level is at least `minAmbient`.
struct CommandCounts {
    long lampTicks = 0;
    long on = 0;
    long dim = 0;
    long off = 0;
};

CommandCounts count_commands(const WorldConfig& config, const Policy& policy, double minAmbient = 0.0);

/// CSV trace `tick,lampIdx,cmd,listening,tx,energyCum`.
void write_trace_csv(std::ostream& out, const WorldConfig& config, const Policy& policy);

nlohmann::json to_json(const WorldConfig& config);
WorldConfig world_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AmbientSchedule& schedule);
AmbientSchedule ambient_schedule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimStats& stats);
nlohmann::json to_json(const FitnessReport& report);

}  // namespace iotagent
