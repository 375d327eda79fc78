#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iotagent/controller.hpp"

namespace iotagent {

/// One entry of an experiment's event log. `seq` starts at 1 and has no gaps.
struct Event {
    std::uint64_t seq = 0;
    std::string type;  // generation | verdict | phase | environment | topology
    nlohmann::json payload;

    bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);

enum class CommandKind { Start, Pause, Resume, Reconfigure, ChangeEnvironment, AutoReconfigure, Snapshot };

std::string to_string(CommandKind kind);

/// `{"kind": ..., "payload": {...}}`. Payload fields per kind:
///   start {generations}, reconfigure {featureConfig | alternatives, reason?},
///   changeEnvironment {ambientSchedule}, autoReconfigure {budgetGenerations};
///   pause, resume and snapshot take none.
struct Command {
    CommandKind kind = CommandKind::Snapshot;
    nlohmann::json payload = nlohmann::json::object();

    /// Throws ValidationError with the offending field path.
    static Command parse(const nlohmann::json& j);
};

struct Ack {
    CommandKind kind = CommandKind::Snapshot;
    /// Seq of the event reflecting the command; for commands that emit no
    /// event, the log head at the moment the command was applied.
    std::uint64_t seq = 0;
    nlohmann::json result;
};

nlohmann::json to_json(const Ack& ack);

class EventLog;

/// A cursor over one experiment's events. Each subscriber has its own.
class EventSubscription {
public:
    EventSubscription(std::shared_ptr<EventLog> log, std::uint64_t afterSeq);

    /// Next event after the cursor, waiting up to `timeout` for a live one.
    /// nullopt on timeout or once the log is closed and drained.
    std::optional<Event> next(std::chrono::milliseconds timeout);
    /// True once every persisted event has been delivered.
    bool caughtUp() const;
    bool closed() const;
    std::uint64_t cursor() const noexcept { return cursor_; }

private:
    std::shared_ptr<EventLog> log_;
    std::uint64_t cursor_;
};

/// Runs experiments in a data directory. Each experiment has one runner
/// thread that trains generation by generation and applies queued commands
/// in between. State survives a restart: `<data>/<id>/experiment.json`,
/// `events.jsonl` and `control.json`.
class ExperimentService {
public:
    struct Options {
        std::string dataDir;
        unsigned workers = 1;  // fitness evaluation threads per experiment
        FeedbackPolicy feedback;
    };

    explicit ExperimentService(Options options);
    ~ExperimentService();

    ExperimentService(const ExperimentService&) = delete;
    ExperimentService& operator=(const ExperimentService&) = delete;

    static const FeatureModel& model();

    /// Request fields (all optional): id, featureConfig, worldConfig,
    /// evoConfig, seed. Returns the new experiment id.
    std::string create(const nlohmann::json& request);
    std::vector<std::string> list() const;

    /// Queues the command and blocks until the runner has applied it.
    /// NotFoundError for an unknown id; ValidationError for a bad payload or
    /// a rejected reconfiguration.
    Ack handleCommand(const std::string& id, const nlohmann::json& command);

    /// Summary of the experiment between generations (no population).
    nlohmann::json snapshot(const std::string& id) const;
    /// Copy of the full experiment as last committed by the runner.
    Experiment experiment(const std::string& id) const;

    /// Events with seq > afterSeq, then live ones.
    EventSubscription subscribe(const std::string& id, std::uint64_t afterSeq = 0) const;
    std::vector<Event> events(const std::string& id, std::uint64_t afterSeq = 0) const;

    /// Blocks until the runner has no queued command and no pending generations.
    void waitIdle(const std::string& id) const;

private:
    class Session;

    std::shared_ptr<Session> find(const std::string& id) const;

    Options options_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    int nextId_ = 1;
};

/// HTTP front end of an ExperimentService:
///   GET  /model
///   GET  /experiments                       ids
///   POST /experiments                       create
///   GET  /experiments/{id}                  snapshot
///   POST /experiments/{id}/commands         command -> ack
///   GET  /experiments/{id}/events?from=S&follow=1
/// Events are streamed as newline-delimited JSON.
class HttpApi {
public:
    explicit HttpApi(ExperimentService& service);
    ~HttpApi();

    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port. Throws IoError when binding fails.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace iotagent
