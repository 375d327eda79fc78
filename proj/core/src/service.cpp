#include "iotagent/service.hpp"

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "iotagent/errors.hpp"
#include "iotagent/json_io.hpp"

namespace iotagent {

namespace fs = std::filesystem;

nlohmann::json to_json(const Event& e) { return {{"seq", e.seq}, {"type", e.type}, {"payload", e.payload}}; }

Event event_from_json(const nlohmann::json& j) {
    try {
        return {j.at("seq").get<std::uint64_t>(), j.at("type").get<std::string>(), j.at("payload")};
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("malformed event: ") + e.what());
    }
}

std::string to_string(CommandKind kind) {
    switch (kind) {
        case CommandKind::Start: return "start";
        case CommandKind::Pause: return "pause";
        case CommandKind::Resume: return "resume";
        case CommandKind::Reconfigure: return "reconfigure";
        case CommandKind::ChangeEnvironment: return "changeEnvironment";
        case CommandKind::AutoReconfigure: return "autoReconfigure";
        case CommandKind::Snapshot: return "snapshot";
    }
    return "?";
}

namespace {

// Re-raises a nested validation error under `prefix`.
template <typename F>
auto under(const std::string& prefix, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(e.detail(), e.path().empty() ? prefix : prefix + "." + e.path());
    }
}

int positive_int(const nlohmann::json& payload, const std::string& field) {
    auto it = payload.find(field);
    if (it == payload.end()) throw ValidationError("is required", "payload." + field);
    if (!it->is_number_integer()) throw ValidationError("must be an integer", "payload." + field);
    const auto v = it->get<long long>();
    if (v < 1 || v > 1000000) throw ValidationError("must be in [1, 1000000]", "payload." + field);
    return static_cast<int>(v);
}

void no_fields(const nlohmann::json& payload) {
    if (!payload.empty()) throw ValidationError("takes no fields", "payload." + payload.begin().key());
}

PhaseReason reconfigure_reason(const nlohmann::json& payload) {
    auto it = payload.find("reason");
    if (it == payload.end()) return PhaseReason::Manual;
    if (!it->is_string()) throw ValidationError("must be a string", "payload.reason");
    const auto r = it->get<std::string>();
    if (r == "manual") return PhaseReason::Manual;
    if (r == "auto") return PhaseReason::Auto;
    throw ValidationError("must be manual or auto", "payload.reason");
}

Configuration reconfigure_target(const FeatureModel& model, const Configuration& current,
                                 const nlohmann::json& payload) {
    if (auto it = payload.find("featureConfig"); it != payload.end())
        return under("payload.featureConfig", [&] { return configuration_from_json(*it); });
    const auto& alts = payload.at("alternatives");
    Configuration c = current;
    for (const auto& [group, child] : alts.items())
        c = under("payload.alternatives", [&] { return with_alternative(model, c, group, child.get<std::string>()); });
    return c;
}

}  // namespace

Command Command::parse(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("command must be an object", "command");
    auto k = j.find("kind");
    if (k == j.end() || !k->is_string()) throw ValidationError("must be a string", "kind");
    for (const auto& [key, _] : j.items())
        if (key != "kind" && key != "payload") throw ValidationError("unknown field", key);

    Command c;
    if (auto p = j.find("payload"); p != j.end()) {
        if (!p->is_object()) throw ValidationError("must be an object", "payload");
        c.payload = *p;
    }
    const std::string kind = k->get<std::string>();
    const auto& pl = c.payload;
    if (kind == "start") {
        c.kind = CommandKind::Start;
        positive_int(pl, "generations");
        if (pl.size() != 1) throw ValidationError("unknown field", "payload");
    } else if (kind == "pause" || kind == "resume" || kind == "snapshot") {
        c.kind = kind == "pause" ? CommandKind::Pause : kind == "resume" ? CommandKind::Resume : CommandKind::Snapshot;
        no_fields(pl);
    } else if (kind == "reconfigure") {
        c.kind = CommandKind::Reconfigure;
        const bool hasConfig = pl.contains("featureConfig");
        const bool hasAlts = pl.contains("alternatives");
        if (hasConfig == hasAlts)
            throw ValidationError("exactly one of featureConfig or alternatives is required", "payload");
        for (const auto& [key, _] : pl.items())
            if (key != "featureConfig" && key != "alternatives" && key != "reason")
                throw ValidationError("unknown field", "payload." + key);
        reconfigure_reason(pl);
        if (hasConfig) {
            under("payload.featureConfig", [&] { return configuration_from_json(pl["featureConfig"]); });
        } else {
            const auto& alts = pl["alternatives"];
            if (!alts.is_object() || alts.empty())
                throw ValidationError("must be a non-empty object", "payload.alternatives");
            for (const auto& [group, child] : alts.items())
                if (!child.is_string()) throw ValidationError("must be a string", "payload.alternatives." + group);
        }
    } else if (kind == "changeEnvironment") {
        c.kind = CommandKind::ChangeEnvironment;
        if (!pl.contains("ambientSchedule")) throw ValidationError("is required", "payload.ambientSchedule");
        if (pl.size() != 1) throw ValidationError("unknown field", "payload");
        under("payload", [&] { return ambient_schedule_from_json(pl["ambientSchedule"]); });
    } else if (kind == "autoReconfigure") {
        c.kind = CommandKind::AutoReconfigure;
        positive_int(pl, "budgetGenerations");
        if (pl.size() != 1) throw ValidationError("unknown field", "payload");
    } else {
        throw ValidationError("unknown command '" + kind + "'", "kind");
    }
    return c;
}

nlohmann::json to_json(const Ack& a) { return {{"kind", to_string(a.kind)}, {"seq", a.seq}, {"result", a.result}}; }

// Append-only event list mirrored to a JSON-lines file.
class EventLog {
public:
    EventLog(std::string path, std::vector<Event> existing) : path_(std::move(path)), events_(std::move(existing)) {
        out_.open(path_, std::ios::binary | std::ios::app);
        if (!out_) throw IoError("cannot open '" + path_ + "' for appending");
    }

    static std::vector<Event> load(const std::string& path) {
        std::vector<Event> events;
        std::ifstream in(path, std::ios::binary);
        if (!in) return events;
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line))
            if (!line.empty()) lines.push_back(line);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(lines[i]);
            } catch (const nlohmann::json::parse_error&) {
                // a torn final line is what an interrupted append leaves behind
                if (i + 1 == lines.size()) break;
                throw CorruptFileError("'" + path + "' line " + std::to_string(i + 1) + " is not valid JSON");
            }
            Event e = event_from_json(j);
            if (e.seq != events.size() + 1)
                throw CorruptFileError("'" + path + "' has a gap at seq " + std::to_string(events.size() + 1));
            events.push_back(std::move(e));
        }
        std::ostringstream clean;
        for (const auto& e : events) clean << to_json(e).dump() << '\n';
        write_text_file(path, clean.str());
        return events;
    }

    Event append(std::string type, nlohmann::json payload) {
        std::lock_guard lk(m_);
        Event e{events_.size() + 1, std::move(type), std::move(payload)};
        out_ << to_json(e).dump() << '\n';
        out_.flush();
        if (!out_) throw IoError("cannot append to '" + path_ + "'");
        events_.push_back(e);
        cv_.notify_all();
        return e;
    }

    std::uint64_t head() const {
        std::lock_guard lk(m_);
        return events_.size();
    }

    std::vector<Event> since(std::uint64_t afterSeq) const {
        std::lock_guard lk(m_);
        if (afterSeq >= events_.size()) return {};
        return {events_.begin() + static_cast<std::ptrdiff_t>(afterSeq), events_.end()};
    }

    std::optional<Event> next(std::uint64_t afterSeq, std::chrono::milliseconds timeout) {
        std::unique_lock lk(m_);
        cv_.wait_for(lk, timeout, [&] { return closed_ || afterSeq < events_.size(); });
        if (afterSeq < events_.size()) return events_[afterSeq];
        return std::nullopt;
    }

    void close() {
        std::lock_guard lk(m_);
        closed_ = true;
        cv_.notify_all();
    }

    bool closed() const {
        std::lock_guard lk(m_);
        return closed_;
    }

private:
    std::string path_;
    mutable std::mutex m_;
    std::condition_variable cv_;
    std::vector<Event> events_;
    std::ofstream out_;
    bool closed_ = false;
};

EventSubscription::EventSubscription(std::shared_ptr<EventLog> log, std::uint64_t afterSeq)
    : log_(std::move(log)), cursor_(afterSeq) {}

std::optional<Event> EventSubscription::next(std::chrono::milliseconds timeout) {
    auto e = log_->next(cursor_, timeout);
    if (e) cursor_ = e->seq;
    return e;
}

bool EventSubscription::caughtUp() const { return cursor_ >= log_->head(); }
bool EventSubscription::closed() const { return log_->closed() && caughtUp(); }

class ExperimentService::Session {
public:
    Session(std::string dir, Experiment experiment, std::vector<Event> events, const Options& options)
        : dir_(std::move(dir)),
          options_(options),
          log_(std::make_shared<EventLog>(dir_ + "/events.jsonl", std::move(events))),
          experiment_(std::move(experiment)) {
        const std::string control = dir_ + "/control.json";
        if (fs::exists(control)) {
            const auto j = read_json_file(control);
            running_ = j.value("running", false);
            remaining_ = j.value("remaining", 0);
        }
    }

    ~Session() { stop(); }

    void launch() {
        thread_ = std::jthread([this](std::stop_token st) { run(st); });
    }

    void stop() {
        if (thread_.joinable()) {
            thread_.request_stop();
            cv_.notify_all();
            thread_.join();
        }
        std::deque<Pending> dropped;
        {
            std::lock_guard lk(m_);
            dropped.swap(queue_);
        }
        for (auto& p : dropped) p.promise.set_exception(std::make_exception_ptr(Error("service stopped")));
        log_->close();
    }

    std::shared_ptr<EventLog> log() const { return log_; }

    Ack submit(Command cmd) {
        std::future<Ack> fut;
        {
            std::lock_guard lk(m_);
            if (thread_.get_stop_token().stop_requested()) throw Error("service stopped");
            queue_.push_back({std::move(cmd), {}});
            fut = queue_.back().promise.get_future();
        }
        cv_.notify_all();
        return fut.get();
    }

    Experiment experiment() const {
        std::lock_guard lk(m_);
        return experiment_;
    }

    nlohmann::json snapshot() const {
        std::lock_guard lk(m_);
        return snapshot_locked();
    }

    void waitIdle() const {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] { return idle_locked() || thread_.get_stop_token().stop_requested(); });
    }

    void persist_all() {
        std::lock_guard lk(m_);
        save_experiment(experiment_, dir_ + "/experiment.json");
        persist_control_locked();
    }

private:
    struct Pending {
        Command command;
        std::promise<Ack> promise;
    };

    bool idle_locked() const { return queue_.empty() && !busy_ && !(running_ && remaining_ > 0); }

    void persist_control_locked() const {
        write_json_file(dir_ + "/control.json", {{"running", running_}, {"remaining", remaining_}});
    }

    nlohmann::json snapshot_locked() const {
        const Experiment& e = experiment_;
        nlohmann::json hist = nlohmann::json::array();
        for (const auto& h : e.history()) hist.push_back({h.best, h.mean});
        nlohmann::json phases = nlohmann::json::array();
        for (const auto& p : e.phaseLog) phases.push_back(to_json(p));
        nlohmann::json verdicts = nlohmann::json::array();
        for (const auto& v : e.verdicts) verdicts.push_back(to_json(v));
        nlohmann::json j = {{"id", e.id},
                            {"generation", e.generation()},
                            {"running", running_},
                            {"remaining", remaining_},
                            {"idle", idle_locked()},
                            {"headSeq", log_->head()},
                            {"featureConfig", to_json(e.featureConfig)},
                            {"spec", to_json(e.spec)},
                            {"worldConfig", to_json(e.worldConfig)},
                            {"evoConfig", to_json(e.evoConfig)},
                            {"history", hist},
                            {"phaseLog", phases},
                            {"verdicts", verdicts},
                            {"bestFitness", nullptr},
                            {"bestGenome", nullptr}};
        if (e.evolution.bestFitness) {
            j["bestFitness"] = *e.evolution.bestFitness;
            j["bestGenome"] = to_json(e.spec, e.evolution.bestGenome);
        }
        if (!lastError_.empty()) j["lastError"] = lastError_;
        return j;
    }

    // Installs a new experiment state and writes it to disk.
    void commit(Experiment next, int consumedGenerations = 0) {
        std::lock_guard lk(m_);
        experiment_ = std::move(next);
        remaining_ -= consumedGenerations;
        save_experiment(experiment_, dir_ + "/experiment.json");
        persist_control_locked();
    }

    void run(std::stop_token st) {
        while (!st.stop_requested()) {
            std::optional<Pending> cmd;
            {
                std::unique_lock lk(m_);
                cv_.wait(lk, st, [&] { return !queue_.empty() || (running_ && remaining_ > 0); });
                if (st.stop_requested()) break;
                if (!queue_.empty()) {
                    cmd.emplace(std::move(queue_.front()));
                    queue_.pop_front();
                }
                busy_ = true;
            }
            if (cmd) {
                try {
                    cmd->promise.set_value(apply(cmd->command));
                } catch (...) {
                    cmd->promise.set_exception(std::current_exception());
                }
            } else {
                try {
                    step();
                } catch (const std::exception& e) {
                    std::lock_guard lk(m_);
                    lastError_ = e.what();
                    running_ = false;
                    persist_control_locked();
                }
            }
            {
                std::lock_guard lk(m_);
                busy_ = false;
            }
            cv_.notify_all();
        }
    }

    void step() {
        const Experiment cur = experiment();
        std::optional<GenerationReport> report;
        Experiment next = train(cur, 1, [&](const GenerationReport& r) { report = r; }, options_.workers);

        const TopologyStats& t = report->topology;
        log_->append("generation", {{"gen", report->generation},
                                    {"best", report->best},
                                    {"mean", report->mean},
                                    {"deselectedInputs", report->deselectedInputs},
                                    {"liveConnections", t.liveConnections},
                                    {"liveInputs", t.liveInputs},
                                    {"liveHidden", t.liveHidden},
                                    {"phase", next.phaseLog.size() - 1}});
        const auto topo = std::make_pair(report->deselectedInputs, t);
        if (!lastTopology_ || *lastTopology_ != topo) {
            log_->append("topology", {{"gen", report->generation},
                                      {"deselectedInputs", report->deselectedInputs},
                                      {"liveConnections", t.liveConnections},
                                      {"liveInputs", t.liveInputs},
                                      {"liveHidden", t.liveHidden}});
            lastTopology_ = topo;
        }

        const Verdict v = evaluate_feedback(next, options_.feedback);
        // first verdict of a phase, or a change of kind
        const bool fresh = next.verdicts.empty() || next.verdicts.back().kind != v.kind ||
                           next.verdicts.back().atGeneration <= next.phaseLog.back().startedAt;
        if (fresh) {
            next.verdicts.push_back(v);
            log_->append("verdict", to_json(v));
        }
        commit(std::move(next), 1);
    }

    Ack apply(const Command& cmd) {
        Ack ack{cmd.kind, 0, nlohmann::json::object()};
        const auto& pl = cmd.payload;
        switch (cmd.kind) {
            case CommandKind::Start:
            case CommandKind::Pause:
            case CommandKind::Resume: {
                std::lock_guard lk(m_);
                if (cmd.kind == CommandKind::Start) remaining_ += pl.at("generations").get<int>();
                running_ = cmd.kind != CommandKind::Pause;
                if (running_) lastError_.clear();
                persist_control_locked();
                ack.seq = log_->head();
                ack.result = {{"running", running_}, {"remaining", remaining_}};
                return ack;
            }
            case CommandKind::Snapshot: {
                std::lock_guard lk(m_);
                ack.seq = log_->head();
                ack.result = snapshot_locked();
                return ack;
            }
            case CommandKind::Reconfigure: {
                const Experiment cur = experiment();
                const Configuration target = reconfigure_target(cur.model, cur.featureConfig, pl);
                Experiment next = apply_reconfiguration(cur, target, reconfigure_reason(pl));
                const auto e = log_->append("phase", phase_payload(next));
                ack.seq = e.seq;
                ack.result = e.payload;
                lastTopology_.reset();
                commit(std::move(next));
                return ack;
            }
            case CommandKind::ChangeEnvironment: {
                const Experiment cur = experiment();
                Experiment next = change_environment(cur, ambient_schedule_from_json(pl.at("ambientSchedule")));
                const auto e = log_->append("environment", {{"index", next.phaseLog.size() - 1},
                                                            {"startedAt", next.phaseLog.back().startedAt},
                                                            {"ambientSchedule", to_json(next.worldConfig.ambientSchedule)}});
                ack.seq = e.seq;
                ack.result = e.payload;
                commit(std::move(next));
                return ack;
            }
            case CommandKind::AutoReconfigure: {
                const Experiment cur = experiment();
                auto report = auto_reconfigure(cur, FeatureDomain::Neural, pl.at("budgetGenerations").get<int>(),
                                               options_.workers);
                nlohmann::json cands = nlohmann::json::array();
                for (const auto& c : report.candidates) cands.push_back(to_json(c));
                ack.result = {{"candidates", cands}, {"adopted", report.adopted}, {"changed", report.changed}};
                if (report.changed) {
                    nlohmann::json payload = phase_payload(report.experiment);
                    payload["candidates"] = cands;
                    payload["adopted"] = report.adopted;
                    ack.seq = log_->append("phase", payload).seq;
                    lastTopology_.reset();
                    commit(std::move(report.experiment));
                } else {
                    ack.seq = log_->head();
                }
                return ack;
            }
        }
        throw Error("unhandled command");
    }

    static nlohmann::json phase_payload(const Experiment& e) {
        const PhaseRecord& p = e.phaseLog.back();
        nlohmann::json j = {{"index", e.phaseLog.size() - 1},
                            {"reason", to_string(p.reason)},
                            {"startedAt", p.startedAt},
                            {"historyOffset", p.historyOffset},
                            {"featureConfig", to_json(p.featureConfig)},
                            {"spec", to_json(e.spec)}};
        if (p.diff) j["diff"] = to_json(*p.diff);
        return j;
    }

    std::string dir_;
    Options options_;
    std::shared_ptr<EventLog> log_;

    mutable std::mutex m_;
    mutable std::condition_variable_any cv_;
    Experiment experiment_;
    std::deque<Pending> queue_;
    bool running_ = false;
    int remaining_ = 0;
    bool busy_ = false;
    std::string lastError_;
    // runner thread only
    std::optional<std::pair<std::vector<std::string>, TopologyStats>> lastTopology_;
    std::jthread thread_;
};

ExperimentService::ExperimentService(Options options) : options_(std::move(options)) {
    options_.feedback.check();
    std::error_code ec;
    fs::create_directories(options_.dataDir, ec);
    if (ec) throw IoError("cannot create '" + options_.dataDir + "': " + ec.message());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(options_.dataDir))
        if (entry.is_directory() && fs::exists(entry.path() / "experiment.json")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
        Experiment e = load_experiment((d / "experiment.json").string());
        auto events = EventLog::load((d / "events.jsonl").string());
        auto s = std::make_shared<Session>(d.string(), std::move(e), std::move(events), options_);
        sessions_.emplace(d.filename().string(), s);
    }
    for (auto& [_, s] : sessions_) s->launch();
}

ExperimentService::~ExperimentService() {
    std::unique_lock lk(mutex_);
    for (auto& [_, s] : sessions_) s->stop();
}

const FeatureModel& ExperimentService::model() {
    static const FeatureModel m = smart_light_model();
    return m;
}

std::string ExperimentService::create(const nlohmann::json& request) {
    if (!request.is_object()) throw ValidationError("must be an object", "request");
    for (const auto& [key, _] : request.items())
        if (key != "id" && key != "featureConfig" && key != "worldConfig" && key != "evoConfig" && key != "seed")
            throw ValidationError("unknown field", key);

    std::uint64_t seed = 1;
    if (auto it = request.find("seed"); it != request.end()) {
        if (!it->is_number_unsigned()) throw ValidationError("must be a non-negative integer", "seed");
        seed = it->get<std::uint64_t>();
    }
    const Configuration config = request.contains("featureConfig")
                                     ? under("featureConfig", [&] { return configuration_from_json(request["featureConfig"]); })
                                     : smart_light_default_config();
    const WorldConfig world = request.contains("worldConfig")
                                  ? under("worldConfig", [&] { return world_config_from_json(request["worldConfig"]); })
                                  : reference_world(seed);
    EvolutionConfig evo;
    if (request.contains("evoConfig")) {
        evo = under("evoConfig", [&] { return evolution_config_from_json(request["evoConfig"]); });
        if (!request["evoConfig"].contains("seed")) evo.seed = seed;
    } else {
        evo.seed = seed;
    }

    std::unique_lock lk(mutex_);
    std::string id;
    if (auto it = request.find("id"); it != request.end()) {
        if (!it->is_string() || !std::regex_match(it->get<std::string>(), std::regex("[A-Za-z0-9_-]{1,64}")))
            throw ValidationError("must match [A-Za-z0-9_-]{1,64}", "id");
        id = it->get<std::string>();
        if (sessions_.count(id)) throw ValidationError("experiment '" + id + "' already exists", "id");
    } else {
        do id = "exp-" + std::to_string(nextId_++);
        while (sessions_.count(id) || fs::exists(fs::path(options_.dataDir) / id));
    }

    Experiment e = create_experiment(model(), config, world, evo, id);
    const fs::path dir = fs::path(options_.dataDir) / id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    write_text_file((dir / "events.jsonl").string(), "");
    auto s = std::make_shared<Session>(dir.string(), std::move(e), std::vector<Event>{}, options_);
    const Experiment& created = s->experiment();
    const PhaseRecord& p = created.phaseLog.back();
    s->log()->append("phase", {{"index", 0},
                               {"reason", to_string(p.reason)},
                               {"startedAt", 0},
                               {"historyOffset", 0},
                               {"featureConfig", to_json(p.featureConfig)},
                               {"spec", to_json(created.spec)}});
    s->persist_all();
    s->launch();
    sessions_.emplace(id, std::move(s));
    return id;
}

std::vector<std::string> ExperimentService::list() const {
    std::shared_lock lk(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : sessions_) ids.push_back(id);
    return ids;
}

std::shared_ptr<ExperimentService::Session> ExperimentService::find(const std::string& id) const {
    std::shared_lock lk(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("no experiment '" + id + "'");
    return it->second;
}

Ack ExperimentService::handleCommand(const std::string& id, const nlohmann::json& command) {
    auto s = find(id);
    return s->submit(Command::parse(command));
}

nlohmann::json ExperimentService::snapshot(const std::string& id) const { return find(id)->snapshot(); }

Experiment ExperimentService::experiment(const std::string& id) const { return find(id)->experiment(); }

EventSubscription ExperimentService::subscribe(const std::string& id, std::uint64_t afterSeq) const {
    return EventSubscription(find(id)->log(), afterSeq);
}

std::vector<Event> ExperimentService::events(const std::string& id, std::uint64_t afterSeq) const {
    return find(id)->log()->since(afterSeq);
}

void ExperimentService::waitIdle(const std::string& id) const { find(id)->waitIdle(); }

}  // namespace iotagent
