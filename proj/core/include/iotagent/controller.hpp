#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iotagent/evolution.hpp"
#include "iotagent/feature_model.hpp"
#include "iotagent/neurogenome.hpp"
#include "iotagent/streetlight_sim.hpp"

namespace iotagent {

enum class PhaseReason { Initial, Manual, Auto, Environment };

std::string to_string(PhaseReason reason);
PhaseReason phase_reason_from_string(const std::string& name);

struct PhaseRecord {
    int startedAt = 0;          // experiment-wide generation index
    std::size_t historyOffset = 0;
    Configuration featureConfig;
    WorldConfig worldConfig;
    PhaseReason reason = PhaseReason::Initial;
    std::optional<ConfigDiff> diff;  // feature phases after the first

    bool operator==(const PhaseRecord&) const;
};

struct FeedbackPolicy {
    double targetFitness = 75.0;
    double degradeDrop = 15.0;
    int degradeWindow = 5;

    void check() const;
};

enum class VerdictKind { Satisfied, UnderTarget, Degraded };

std::string to_string(VerdictKind kind);
VerdictKind verdict_kind_from_string(const std::string& name);

struct Verdict {
    VerdictKind kind = VerdictKind::UnderTarget;
    int atGeneration = 0;
    double bestFitness = 0.0;
    double recentDrop = 0.0;

    bool operator==(const Verdict&) const = default;
};

struct Experiment {
    std::string id;
    FeatureModel model;
    Configuration featureConfig;
    NetworkSpec spec;
    WorldConfig worldConfig;
    EvolutionConfig evoConfig;
    EvolutionState evolution;
    /// Best/mean of generations from earlier feature phases.
    std::vector<GenerationStats> archivedHistory;
    std::vector<PhaseRecord> phaseLog;
    std::vector<Verdict> verdicts;

    /// Generations trained so far over all phases.
    int generation() const noexcept { return static_cast<int>(archivedHistory.size() + evolution.history.size()); }
    /// Raw best/mean over all phases; phase boundaries are in phaseLog.
    std::vector<GenerationStats> history() const;
};

Experiment create_experiment(const FeatureModel& model, const Configuration& featureConfig,
                             const WorldConfig& worldConfig, const EvolutionConfig& evoConfig,
                             std::string id = "experiment");

/// Episode fitness of a genome in the experiment's current world.
FitnessFunction make_fitness_function(const Experiment& experiment);

/// What one trained generation looked like, for observers.
struct GenerationReport {
    int generation = 0;  // experiment-wide, 1-based
    double best = 0.0;
    double mean = 0.0;
    std::vector<std::string> deselectedInputs;  // of the generation's best genome
    TopologyStats topology;
};

using GenerationObserver = std::function<void(const GenerationReport&)>;

/// Runs `generations` evolution steps in the current phase.
Experiment train(const Experiment& experiment, int generations, const GenerationObserver& observer = {},
                 unsigned workers = 0);

/// Throws Error when nothing has been trained yet.
Verdict evaluate_feedback(const Experiment& experiment, const FeedbackPolicy& policy = {});

/// Starts a new feature phase with a fresh population. Throws
/// ValidationError for an invalid or unchanged configuration.
Experiment apply_reconfiguration(const Experiment& experiment, const Configuration& newConfig, PhaseReason reason);

/// Swaps the ambient schedule, keeps the genomes and drops all fitness values.
Experiment change_environment(const Experiment& experiment, const AmbientSchedule& schedule);

struct CandidateResult {
    Configuration featureConfig;
    std::map<std::string, std::string> choices;  // alternative group -> child
    double bestFitness = 0.0;
    int liveConnections = 0;
};

struct AutoReconfigureReport {
    Experiment experiment;
    std::vector<CandidateResult> candidates;
    std::size_t adopted = 0;
    bool changed = false;  // false when the adopted candidate is the current config
};

/// Neural alternative groups of the current configuration, every combination
/// of their children, in model order.
std::vector<CandidateResult> neural_candidates(const FeatureModel& model, const Configuration& config);

/// Trains every neural candidate for `budgetGenerations` and adopts the best.
AutoReconfigureReport auto_reconfigure(const Experiment& experiment, FeatureDomain variationPoint,
                                       int budgetGenerations, unsigned workers = 0);

/// Throws ValidationError describing the first broken invariant.
void check_invariants(const Experiment& experiment);

nlohmann::json to_json(const Verdict& verdict);
Verdict verdict_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PhaseRecord& phase);
nlohmann::json to_json(const CandidateResult& candidate);

/// Experiment document (format "iotagent-experiment").
nlohmann::json to_json(const Experiment& experiment);
Experiment experiment_from_json(const nlohmann::json& j);

void save_experiment(const Experiment& experiment, const std::string& path);
Experiment load_experiment(const std::string& path);

}  // namespace iotagent
