#include "iotagent/controller.hpp"

#include <algorithm>
#include <limits>

#include "iotagent/errors.hpp"
#include "iotagent/json_io.hpp"

namespace iotagent {

namespace {

constexpr int kExperimentVersion = 1;
constexpr const char* kExperimentFormat = "iotagent-experiment";

NetworkSpec spec_for(const FeatureModel& model, const Configuration& config) {
    const auto result = validate(model, config);
    if (!result.ok()) throw ValidationError(result.describe(), "featureConfig");
    return network_spec_from(derive_search_space(model, config));
}

// Each feature phase gets its own evolution stream.
EvolutionConfig phase_evo_config(const EvolutionConfig& base, std::size_t phaseIndex) {
    EvolutionConfig c = base;
    if (phaseIndex > 0) c.seed = derive_seed(base.seed, phaseIndex);
    return c;
}

bool is_feature_phase(PhaseReason r) { return r != PhaseReason::Environment; }

const PhaseRecord& last_feature_phase(const Experiment& e) {
    for (auto it = e.phaseLog.rbegin(); it != e.phaseLog.rend(); ++it)
        if (is_feature_phase(it->reason)) return *it;
    throw ValidationError("phase log has no feature phase", "phaseLog");
}

std::vector<std::string> input_names(const FeatureModel& model, const Configuration& config) {
    return derive_search_space(model, config).inputNames;
}

}  // namespace

std::string to_string(PhaseReason reason) {
    switch (reason) {
        case PhaseReason::Initial: return "initial";
        case PhaseReason::Manual: return "manual";
        case PhaseReason::Auto: return "auto";
        case PhaseReason::Environment: return "environment";
    }
    return "?";
}

PhaseReason phase_reason_from_string(const std::string& name) {
    if (name == "initial") return PhaseReason::Initial;
    if (name == "manual") return PhaseReason::Manual;
    if (name == "auto") return PhaseReason::Auto;
    if (name == "environment") return PhaseReason::Environment;
    throw ValidationError("unknown phase reason '" + name + "'", "reason");
}

bool PhaseRecord::operator==(const PhaseRecord& o) const {
    const auto diffEq = [](const std::optional<ConfigDiff>& a, const std::optional<ConfigDiff>& b) {
        if (a.has_value() != b.has_value()) return false;
        if (!a) return true;
        return a->added == b->added && a->removed == b->removed && a->changedBindings == b->changedBindings &&
               a->changedGroups == b->changedGroups;
    };
    return startedAt == o.startedAt && historyOffset == o.historyOffset && featureConfig == o.featureConfig &&
           worldConfig == o.worldConfig && reason == o.reason && diffEq(diff, o.diff);
}

void FeedbackPolicy::check() const {
    if (degradeWindow < 1) throw ValidationError("must be >= 1", "degradeWindow");
    if (!(degradeDrop >= 0.0)) throw ValidationError("must be >= 0", "degradeDrop");
}

std::string to_string(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::Satisfied: return "satisfied";
        case VerdictKind::UnderTarget: return "underTarget";
        case VerdictKind::Degraded: return "degraded";
    }
    return "?";
}

VerdictKind verdict_kind_from_string(const std::string& name) {
    if (name == "satisfied") return VerdictKind::Satisfied;
    if (name == "underTarget") return VerdictKind::UnderTarget;
    if (name == "degraded") return VerdictKind::Degraded;
    throw ValidationError("unknown verdict '" + name + "'", "kind");
}

std::vector<GenerationStats> Experiment::history() const {
    std::vector<GenerationStats> all = archivedHistory;
    all.insert(all.end(), evolution.history.begin(), evolution.history.end());
    return all;
}

Experiment create_experiment(const FeatureModel& model, const Configuration& featureConfig,
                             const WorldConfig& worldConfig, const EvolutionConfig& evoConfig, std::string id) {
    const NetworkSpec spec = spec_for(model, featureConfig);
    worldConfig.check();
    evoConfig.check();
    // validates the I/O names against the simulator before any training
    (void)IoLayout::from_names(input_names(model, featureConfig), derive_search_space(model, featureConfig).outputNames);
    Experiment e{std::move(id), model, featureConfig, spec, worldConfig, evoConfig,
                 init_population(spec, evoConfig), {}, {}, {}};
    e.phaseLog.push_back({0, 0, featureConfig, worldConfig, PhaseReason::Initial, std::nullopt});
    check_invariants(e);
    return e;
}

FitnessFunction make_fitness_function(const Experiment& experiment) {
    const SearchSpace space = derive_search_space(experiment.model, experiment.featureConfig);
    const IoLayout layout = IoLayout::from_names(space.inputNames, space.outputNames);
    const NetworkSpec spec = experiment.spec;
    const WorldConfig world = experiment.worldConfig;
    return {spec, [spec, world, layout](const Genome& g) {
                const Policy policy = NetworkPolicy(spec, g, layout);
                return fitness_report(run_episode(world, policy)).fitness;
            }};
}

Experiment train(const Experiment& experiment, int generations, const GenerationObserver& observer,
                 unsigned workers) {
    if (generations < 0) throw ValidationError("must be >= 0", "generations");
    Experiment e = experiment;
    if (generations == 0) return e;
    const FitnessFunction fn = make_fitness_function(e);
    const auto names = input_names(e.model, e.featureConfig);
    for (int g = 0; g < generations; ++g) {
        e.evolution = evolve_step(e.evolution, fn, workers);
        if (observer) {
            // elites come first, so slot 0 holds this generation's best
            const Genome& best = e.evolution.population.front().genome;
            GenerationReport r;
            r.generation = e.generation();
            r.best = e.evolution.history.back().best;
            r.mean = e.evolution.history.back().mean;
            for (int idx : deselected_inputs(best)) r.deselectedInputs.push_back(names[static_cast<std::size_t>(idx)]);
            r.topology = effective_topology(best);
            observer(r);
        }
    }
    return e;
}

Verdict evaluate_feedback(const Experiment& experiment, const FeedbackPolicy& policy) {
    policy.check();
    const auto& hist = experiment.evolution.history;
    if (hist.empty()) throw Error("no evaluated generation in the current phase");

    // generations of the current feature phase that lie inside the window
    const std::size_t total = static_cast<std::size_t>(experiment.generation());
    const std::size_t phaseStart = last_feature_phase(experiment).historyOffset;
    const std::size_t archived = experiment.archivedHistory.size();
    const std::size_t windowStart =
        std::max(phaseStart, total > static_cast<std::size_t>(policy.degradeWindow)
                                 ? total - static_cast<std::size_t>(policy.degradeWindow) - 1
                                 : std::size_t{0});
    double drop = 0.0;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = std::max(windowStart, archived); k < total; ++k) {
        const double b = hist[k - archived].best;
        drop = std::max(drop, peak - b);
        peak = std::max(peak, b);
    }

    Verdict v;
    v.atGeneration = static_cast<int>(total);
    v.bestFitness = hist.back().best;
    v.recentDrop = drop;
    if (v.bestFitness >= policy.targetFitness) v.kind = VerdictKind::Satisfied;
    else if (drop >= policy.degradeDrop) v.kind = VerdictKind::Degraded;
    else v.kind = VerdictKind::UnderTarget;
    return v;
}

Experiment apply_reconfiguration(const Experiment& experiment, const Configuration& newConfig, PhaseReason reason) {
    if (reason == PhaseReason::Initial || reason == PhaseReason::Environment)
        throw ValidationError("reconfiguration reason must be manual or auto", "reason");
    const NetworkSpec spec = spec_for(experiment.model, newConfig);
    const SearchSpace space = derive_search_space(experiment.model, newConfig);
    (void)IoLayout::from_names(space.inputNames, space.outputNames);
    ConfigDiff d = diff(experiment.model, experiment.featureConfig, newConfig);
    if (d.empty()) throw ValidationError("configuration is unchanged", "featureConfig");

    Experiment e = experiment;
    e.archivedHistory.insert(e.archivedHistory.end(), e.evolution.history.begin(), e.evolution.history.end());
    e.featureConfig = newConfig;
    e.spec = spec;
    e.evolution = init_population(spec, phase_evo_config(e.evoConfig, e.phaseLog.size()));
    e.phaseLog.push_back(
        {e.generation(), e.archivedHistory.size(), newConfig, e.worldConfig, reason, std::move(d)});
    check_invariants(e);
    return e;
}

Experiment change_environment(const Experiment& experiment, const AmbientSchedule& schedule) {
    check_schedule(schedule, experiment.worldConfig.timeSimulation);
    if (schedule == experiment.worldConfig.ambientSchedule)
        throw ValidationError("schedule is unchanged", "ambientSchedule");
    Experiment e = experiment;
    e.worldConfig.ambientSchedule = schedule;
    e.evolution.invalidateFitness();
    e.phaseLog.push_back({e.generation(), static_cast<std::size_t>(e.generation()), e.featureConfig, e.worldConfig,
                          PhaseReason::Environment, std::nullopt});
    check_invariants(e);
    return e;
}

std::vector<CandidateResult> neural_candidates(const FeatureModel& model, const Configuration& config) {
    std::vector<const FeatureNode*> groups;
    for (const FeatureNode* n : model.nodes())
        if (n->groupType == GroupType::Alternative && n->domain == FeatureDomain::Neural && config.selected.count(n->id))
            groups.push_back(n);

    std::vector<CandidateResult> out{CandidateResult{config, {}, 0.0, 0}};
    for (const FeatureNode* g : groups) {
        std::vector<CandidateResult> next;
        for (const auto& partial : out) {
            for (const auto& child : g->children) {
                CandidateResult c = partial;
                c.featureConfig = with_alternative(model, partial.featureConfig, g->id, child.id);
                c.choices[g->id] = child.id;
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    if (groups.empty()) out.clear();
    return out;
}

AutoReconfigureReport auto_reconfigure(const Experiment& experiment, FeatureDomain variationPoint,
                                       int budgetGenerations, unsigned workers) {
    if (variationPoint != FeatureDomain::Neural)
        throw ValidationError("only the neural variation point is supported", "variationPoint");
    if (budgetGenerations < 1) throw ValidationError("needs at least 1 generation per candidate", "budgetGenerations");

    AutoReconfigureReport report{experiment, neural_candidates(experiment.model, experiment.featureConfig), 0, false};
    if (report.candidates.empty()) throw ValidationError("no neural alternatives in the configuration", "featureConfig");

    const std::uint64_t base = derive_seed(experiment.evoConfig.seed, 0x1000 + experiment.phaseLog.size());
    for (std::size_t i = 0; i < report.candidates.size(); ++i) {
        auto& cand = report.candidates[i];
        Experiment trial = experiment;
        trial.featureConfig = cand.featureConfig;
        trial.spec = spec_for(trial.model, cand.featureConfig);
        EvolutionConfig cfg = trial.evoConfig;
        cfg.seed = derive_seed(base, i);
        trial.evolution = init_population(trial.spec, cfg);
        trial = train(trial, budgetGenerations, {}, workers);
        cand.bestFitness = *trial.evolution.bestFitness;
        cand.liveConnections = effective_topology(trial.evolution.bestGenome).liveConnections;
    }

    std::size_t pick = 0;
    for (std::size_t i = 1; i < report.candidates.size(); ++i) {
        const auto& c = report.candidates[i];
        const auto& p = report.candidates[pick];
        if (c.bestFitness > p.bestFitness || (c.bestFitness == p.bestFitness && c.liveConnections < p.liveConnections))
            pick = i;
    }
    report.adopted = pick;
    if (!(report.candidates[pick].featureConfig == experiment.featureConfig)) {
        report.experiment = apply_reconfiguration(experiment, report.candidates[pick].featureConfig, PhaseReason::Auto);
        report.changed = true;
    }
    return report;
}

void check_invariants(const Experiment& e) {
    if (e.phaseLog.empty()) throw ValidationError("phase log is empty", "phaseLog");
    if (e.phaseLog.front().reason != PhaseReason::Initial)
        throw ValidationError("first phase must be initial", "phaseLog[0]");
    if (!(e.spec == spec_for(e.model, e.featureConfig)))
        throw ValidationError("spec differs from the one derived from the feature config", "spec");
    if (!(e.evolution.spec == e.spec)) throw ValidationError("evolution runs a different spec", "evolution.spec");
    check_invariants(e.evolution);
    e.worldConfig.check();

    const PhaseRecord& last = e.phaseLog.back();
    if (!(last.featureConfig == e.featureConfig) || !(last.worldConfig == e.worldConfig))
        throw ValidationError("latest phase does not match the current configuration", "phaseLog");
    if (last_feature_phase(e).historyOffset != e.archivedHistory.size())
        throw ValidationError("feature phase offset differs from archived history", "archivedHistory");
    for (std::size_t i = 1; i < e.phaseLog.size(); ++i) {
        const auto& p = e.phaseLog[i];
        const auto& prev = e.phaseLog[i - 1];
        if (p.startedAt < prev.startedAt) throw ValidationError("phases out of order", "phaseLog");
        if (p.reason == PhaseReason::Environment) {
            if (p.worldConfig == prev.worldConfig || !(p.featureConfig == prev.featureConfig))
                throw ValidationError("environment phase must change only the world", "phaseLog");
        } else if (p.reason == PhaseReason::Initial || !p.diff || p.diff->empty() ||
                   !(p.worldConfig == prev.worldConfig)) {
            throw ValidationError("feature phase without a diff", "phaseLog");
        }
    }
}

nlohmann::json to_json(const Verdict& v) {
    return {{"kind", to_string(v.kind)},
            {"atGeneration", v.atGeneration},
            {"bestFitness", v.bestFitness},
            {"recentDrop", v.recentDrop}};
}

Verdict verdict_from_json(const nlohmann::json& j) {
    Verdict v;
    v.kind = verdict_kind_from_string(j.at("kind").get<std::string>());
    v.atGeneration = j.at("atGeneration").get<int>();
    v.bestFitness = j.at("bestFitness").get<double>();
    v.recentDrop = j.at("recentDrop").get<double>();
    return v;
}

nlohmann::json to_json(const PhaseRecord& p) {
    nlohmann::json j = {{"startedAt", p.startedAt},
                        {"historyOffset", p.historyOffset},
                        {"featureConfig", to_json(p.featureConfig)},
                        {"worldConfig", to_json(p.worldConfig)},
                        {"reason", to_string(p.reason)}};
    if (p.diff) j["diff"] = to_json(*p.diff);
    return j;
}

nlohmann::json to_json(const CandidateResult& c) {
    return {{"featureConfig", to_json(c.featureConfig)},
            {"choices", c.choices},
            {"bestFitness", c.bestFitness},
            {"liveConnections", c.liveConnections}};
}

nlohmann::json to_json(const Experiment& e) {
    nlohmann::json archived = nlohmann::json::array();
    for (const auto& h : e.archivedHistory) archived.push_back({h.best, h.mean});
    nlohmann::json phases = nlohmann::json::array();
    for (const auto& p : e.phaseLog) phases.push_back(to_json(p));
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : e.verdicts) verdicts.push_back(to_json(v));
    return {{"format", kExperimentFormat},
            {"version", kExperimentVersion},
            {"id", e.id},
            {"model", to_json(e.model)},
            {"featureConfig", to_json(e.featureConfig)},
            {"worldConfig", to_json(e.worldConfig)},
            {"evoConfig", to_json(e.evoConfig)},
            {"checkpoint", to_json(e.evolution)},
            {"archivedHistory", archived},
            {"phaseLog", phases},
            {"verdicts", verdicts}};
}

Experiment experiment_from_json(const nlohmann::json& j) {
    check_document_header(j, kExperimentFormat, kExperimentVersion);
    try {
        const FeatureModel model = feature_model_from_json(j.at("model"));
        const Configuration config = configuration_from_json(j.at("featureConfig"));
        Experiment e{j.at("id").get<std::string>(),
                     model,
                     config,
                     spec_for(model, config),
                     world_config_from_json(j.at("worldConfig")),
                     evolution_config_from_json(j.at("evoConfig")),
                     evolution_state_from_json(j.at("checkpoint")),
                     {},
                     {},
                     {}};
        for (const auto& h : j.at("archivedHistory")) e.archivedHistory.push_back({h.at(0).get<double>(), h.at(1).get<double>()});
        for (const auto& pj : j.at("phaseLog")) {
            PhaseRecord p;
            p.startedAt = pj.at("startedAt").get<int>();
            p.historyOffset = pj.at("historyOffset").get<std::size_t>();
            p.featureConfig = configuration_from_json(pj.at("featureConfig"));
            p.worldConfig = world_config_from_json(pj.at("worldConfig"));
            p.reason = phase_reason_from_string(pj.at("reason").get<std::string>());
            // the diff is derived data; rebuild it rather than trusting the file
            if (is_feature_phase(p.reason) && !e.phaseLog.empty())
                p.diff = diff(model, e.phaseLog.back().featureConfig, p.featureConfig);
            e.phaseLog.push_back(std::move(p));
        }
        for (const auto& vj : j.at("verdicts")) e.verdicts.push_back(verdict_from_json(vj));
        check_invariants(e);
        return e;
    } catch (const VersionError&) {
        throw;
    } catch (const CorruptFileError&) {
        throw;
    } catch (const nlohmann::json::exception& ex) {
        throw CorruptFileError(std::string("malformed experiment: ") + ex.what());
    } catch (const Error& ex) {
        throw CorruptFileError(std::string("inconsistent experiment: ") + ex.what());
    }
}

void save_experiment(const Experiment& experiment, const std::string& path) {
    write_json_file(path, to_json(experiment));
}

Experiment load_experiment(const std::string& path) { return experiment_from_json(read_json_file(path)); }

}  // namespace iotagent
