// iotagent: scripted experiments and the HTTP server.
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "iotagent/controller.hpp"
#include "iotagent/errors.hpp"
#include "iotagent/json_io.hpp"
#include "iotagent/service.hpp"

namespace fs = std::filesystem;
using namespace iotagent;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

// A run file is either a bare feature configuration or
// {"featureConfig": ..., "worldConfig": ..., "evoConfig": ...}.
struct RunFile {
    Configuration featureConfig;
    std::optional<WorldConfig> world;
    std::optional<EvolutionConfig> evo;
};

RunFile read_run_file(const std::string& path) {
    const auto j = read_json_file(path);
    RunFile r;
    if (j.is_object() && j.contains("featureConfig")) {
        r.featureConfig = configuration_from_json(j["featureConfig"]);
        if (j.contains("worldConfig")) r.world = world_config_from_json(j["worldConfig"]);
        if (j.contains("evoConfig")) r.evo = evolution_config_from_json(j["evoConfig"]);
    } else {
        r.featureConfig = configuration_from_json(j);
    }
    return r;
}

void print_progress(const GenerationReport& r) {
    std::cout << "gen " << std::setw(4) << r.generation << "  best " << std::fixed << std::setprecision(3)
              << std::setw(8) << r.best << "  mean " << std::setw(8) << r.mean << "  live "
              << r.topology.liveConnections;
    if (!r.deselectedInputs.empty()) {
        std::cout << "  deselected";
        for (const auto& n : r.deselectedInputs) std::cout << ' ' << n;
    }
    std::cout << '\n';
}

void print_verdict(const Experiment& e) {
    if (e.evolution.history.empty()) return;
    const Verdict v = evaluate_feedback(e);
    std::cout << "verdict " << to_string(v.kind) << " (best " << v.bestFitness << ", recent drop " << v.recentDrop
              << ")\n";
}

void write_history_csv(std::ostream& out, const Experiment& e) {
    out << "generation,phase,best,mean\n";
    const auto hist = e.history();
    std::size_t phase = 0;
    out << std::setprecision(17);
    for (std::size_t g = 0; g < hist.size(); ++g) {
        while (phase + 1 < e.phaseLog.size() && static_cast<std::size_t>(e.phaseLog[phase + 1].startedAt) <= g) ++phase;
        out << g + 1 << ',' << phase << ',' << hist[g].best << ',' << hist[g].mean << '\n';
    }
}

void write_text_report(std::ostream& out, const Experiment& e) {
    const auto space = derive_search_space(e.model, e.featureConfig);
    out << "experiment " << e.id << "\n";
    out << "generations " << e.generation() << "\n";
    out << "network " << e.spec.inputs << "x" << e.spec.hidden << "x" << e.spec.outputs << " "
        << to_string(e.spec.activation) << "\n";
    out << "phases\n";
    for (std::size_t i = 0; i < e.phaseLog.size(); ++i) {
        const auto& p = e.phaseLog[i];
        out << "  " << i << " " << to_string(p.reason) << " at generation " << p.startedAt;
        if (p.diff && !p.diff->changedGroups.empty()) {
            for (const auto& [g, change] : p.diff->changedGroups)
                out << "  " << g << ": " << change.first << " -> " << change.second;
        }
        out << "\n";
    }
    if (!e.evolution.bestFitness) {
        out << "no generation trained in the current phase\n";
        return;
    }
    const Genome& best = e.evolution.bestGenome;
    const auto topo = effective_topology(best);
    out << std::fixed << std::setprecision(3);
    out << "best fitness " << *e.evolution.bestFitness << "\n";
    out << "live connections " << topo.liveConnections << " (inputs " << topo.liveInputs << ", hidden "
        << topo.liveHidden << ")\n";
    out << "deselected inputs";
    const auto gone = deselected_inputs(best);
    if (gone.empty()) out << " none";
    for (int i : gone) out << ' ' << space.inputNames[static_cast<std::size_t>(i)];
    out << "\n";
    const Policy policy = NetworkPolicy(e.spec, best, IoLayout::from_names(space.inputNames, space.outputNames));
    const auto r = fitness_report(run_episode(e.worldConfig, policy));
    out << "current world: fitness " << r.fitness << "  people " << r.pPeople << "%  trip " << r.pTrip
        << "%  energy " << r.pEnergy << "%\n";
    for (const auto& v : e.verdicts)
        out << "verdict at " << v.atGeneration << ": " << to_string(v.kind) << " (best " << v.bestFitness << ")\n";
    if (!e.evolution.history.empty()) {
        const Verdict v = evaluate_feedback(e);
        out << "verdict now: " << to_string(v.kind) << " (best " << v.bestFitness << ", recent drop " << v.recentDrop
            << ")\n";
    }
}

int serve(const std::string& host, int port, const std::string& dataDir, unsigned workers) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ExperimentService service({dataDir, workers, {}});
    HttpApi api(service);
    const int bound = api.start(host, port);
    std::cout << "listening on " << host << ":" << bound << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "shutting down" << std::endl;
    api.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature-driven neuroevolution of smart street light agents"};
    app.require_subcommand(1);

    auto* model = app.add_subcommand("model", "Inspect the built-in feature model");
    model->require_subcommand(1);
    auto* show = model->add_subcommand("show", "Print the feature model");
    bool showDefault = false;
    show->add_flag("--default-config", showDefault, "Print the expert configuration instead");
    auto* validateCmd = model->add_subcommand("validate", "Validate a feature configuration");
    std::string configPath;
    validateCmd->add_option("--config", configPath, "Configuration file")->required();

    auto* run = app.add_subcommand("run", "Train a new experiment");
    int generations = 60;
    std::uint64_t seed = 1;
    std::string outDir;
    std::string worldPath;
    unsigned workers = 0;
    run->add_option("--config", configPath, "Feature configuration or run file")->required();
    run->add_option("--generations,-n", generations, "Generations to train")->check(CLI::NonNegativeNumber);
    run->add_option("--seed", seed, "Evolution and pedestrian seed");
    run->add_option("--out", outDir, "Output directory")->required();
    run->add_option("--world", worldPath, "World configuration file (default: reference street)");
    run->add_option("--workers", workers, "Evaluation threads (0: all cores)");

    auto* resume = app.add_subcommand("resume", "Continue training a saved experiment");
    std::string experimentPath;
    std::optional<int> more;
    resume->add_option("--experiment", experimentPath, "Experiment file")->required();
    resume->add_option("--generations,-n", more, "Generations to add (default: up to the configured count)");
    resume->add_option("--workers", workers, "Evaluation threads (0: all cores)");

    auto* report = app.add_subcommand("report", "Summarize a saved experiment");
    std::string format = "text";
    std::string tracePath;
    report->add_option("--experiment", experimentPath, "Experiment file")->required();
    report->add_option("--format", format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
    report->add_option("--trace", tracePath, "Also write a per-tick lamp trace of the best genome");

    auto* serveCmd = app.add_subcommand("serve", "Run the HTTP API");
    int port = 8080;
    std::string dataDir = "data";
    std::string host = "127.0.0.1";
    serveCmd->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
    serveCmd->add_option("--data", dataDir, "Experiment data directory");
    serveCmd->add_option("--host", host, "Bind address");
    serveCmd->add_option("--workers", workers, "Evaluation threads per experiment (0: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        const FeatureModel builtin = smart_light_model();
        if (*model) {
            if (model->got_subcommand("show")) {
                std::cout << canonical_text(showDefault ? to_json(smart_light_default_config()) : to_json(builtin));
                return 0;
            }
            const Configuration c = configuration_from_json(read_json_file(configPath));
            const auto result = validate(builtin, c);
            if (!result.ok()) {
                std::cerr << result.describe() << "\n";
                return kExitValidation;
            }
            const NetworkSpec spec = network_spec_from(derive_search_space(builtin, c));
            std::cout << "valid: " << spec.inputs << "x" << spec.hidden << "x" << spec.outputs << " "
                      << to_string(spec.activation) << "\n";
            return 0;
        }
        if (*run) {
            RunFile rf = read_run_file(configPath);
            WorldConfig world = worldPath.empty() ? rf.world.value_or(reference_world(seed))
                                                  : world_config_from_json(read_json_file(worldPath));
            EvolutionConfig evo = rf.evo.value_or(EvolutionConfig{});
            evo.seed = seed;
            evo.generations = generations;
            Experiment e = create_experiment(builtin, rf.featureConfig, world, evo,
                                             fs::path(outDir).filename().string());
            e = train(e, generations, print_progress, workers);
            fs::create_directories(outDir);
            save_experiment(e, (fs::path(outDir) / "experiment.json").string());
            std::ofstream csv(fs::path(outDir) / "history.csv");
            write_history_csv(csv, e);
            print_verdict(e);
            std::cout << "saved " << (fs::path(outDir) / "experiment.json").string() << "\n";
            return 0;
        }
        if (*resume) {
            Experiment e = load_experiment(experimentPath);
            const int target = e.evoConfig.generations;
            const int done = static_cast<int>(e.evolution.history.size());
            const int n = more.value_or(std::max(0, target - done));
            e = train(e, n, print_progress, workers);
            save_experiment(e, experimentPath);
            print_verdict(e);
            return 0;
        }
        if (*report) {
            const Experiment e = load_experiment(experimentPath);
            if (format == "csv") write_history_csv(std::cout, e);
            else write_text_report(std::cout, e);
            if (!tracePath.empty()) {
                if (!e.evolution.bestFitness) throw ValidationError("no trained genome to trace", "experiment");
                const auto space = derive_search_space(e.model, e.featureConfig);
                std::ofstream out(tracePath);
                if (!out) throw IoError("cannot write '" + tracePath + "'");
                write_trace_csv(out, e.worldConfig,
                                NetworkPolicy(e.spec, e.evolution.bestGenome,
                                              IoLayout::from_names(space.inputNames, space.outputNames)));
            }
            return 0;
        }
        if (*serveCmd) return serve(host, port, dataDir, workers);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const CorruptFileError& e) {
        std::cerr << "corrupt file: " << e.what() << "\n";
        return kExitIo;
    } catch (const VersionError& e) {
        std::cerr << "unsupported version: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
