#include <atomic>
#include <thread>

#include <httplib.h>

#include "iotagent/errors.hpp"
#include "iotagent/service.hpp"

namespace iotagent {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json");
}

// Runs `f` and turns library errors into JSON error responses.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        send_json(res, 400, {{"error", e.detail()}, {"path", e.path()}});
    } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, {{"error", e.what()}, {"path", "body"}});
    } catch (const Error& e) {
        send_json(res, 409, {{"error", e.what()}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
    }
}

nlohmann::json parse_body(const httplib::Request& req) {
    try {
        return req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what(), "body");
    }
}

std::uint64_t query_seq(const httplib::Request& req) {
    if (!req.has_param("from")) return 0;
    const std::string v = req.get_param_value("from");
    try {
        std::size_t used = 0;
        const auto n = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ValidationError("must be a non-negative integer", "from");
    }
}

}  // namespace

struct HttpApi::Impl {
    ExperimentService& service;
    httplib::Server server;
    std::atomic<bool> stopping{false};
    std::thread thread;

    explicit Impl(ExperimentService& s) : service(s) {
        server.new_task_queue = [] { return new httplib::ThreadPool(32); };
        routes();
    }

    void routes() {
        server.Get("/model", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, to_json(ExperimentService::model()));
        });
        server.Get("/experiments", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, {{"experiments", service.list()}}); });
        });
        server.Post("/experiments", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string id = service.create(parse_body(req));
                send_json(res, 201, {{"id", id}});
            });
        });
        server.Get(R"(/experiments/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, service.snapshot(req.matches[1])); });
        });
        server.Post(R"(/experiments/([A-Za-z0-9_-]+)/commands)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] { send_json(res, 200, to_json(service.handleCommand(req.matches[1], parse_body(req)))); });
                    });
        server.Get(R"(/experiments/([A-Za-z0-9_-]+)/events)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] { stream(req, res); });
                   });
    }

    void stream(const httplib::Request& req, httplib::Response& res) {
        const bool follow = !req.has_param("follow") || req.get_param_value("follow") != "0";
        auto sub = std::make_shared<EventSubscription>(service.subscribe(req.matches[1], query_seq(req)));
        res.set_chunked_content_provider("application/x-ndjson", [this, sub, follow](std::size_t, httplib::DataSink& sink) {
            if (stopping || sub->closed() || (!follow && sub->caughtUp())) {
                sink.done();
                return true;
            }
            if (!sink.is_writable()) return false;
            // drain what is already there, then wait briefly for a live event
            while (auto e = sub->next(std::chrono::milliseconds(follow ? 200 : 0))) {
                const std::string line = to_json(*e).dump() + "\n";
                if (!sink.write(line.data(), line.size())) return false;
                if (sub->caughtUp()) break;
            }
            return true;
        });
    }
};

HttpApi::HttpApi(ExperimentService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) bound = impl_->server.bind_to_any_port(host);
    else if (!impl_->server.bind_to_port(host, port)) bound = -1;
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpApi::run(const std::string& host, int port) {
    if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    impl_->server.listen_after_bind();
}

void HttpApi::stop() {
    if (!impl_) return;
    impl_->stopping = true;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace iotagent
