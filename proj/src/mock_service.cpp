#include <atomic>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "catkb/error.hpp"
#include "catkb/remote.hpp"

namespace catkb {

namespace {

using nlohmann::json;

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply_json(res, status, json{{"error", message}});
}

}  // namespace

struct MockScoringService::Impl {
  std::unique_ptr<ScorerBackend> backend;
  MockServiceOptions options;
  httplib::Server server;
  std::thread thread;
  std::shared_mutex model_mutex;
  std::mutex train_mutex;
  std::atomic<int> busy_left{0};
  std::string host;
  int port = 0;

  void install() {
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      reply_json(res, 200,
                 json{{"status", "ok"},
                      {"identity", backend->identity()},
                      {"can_train", backend->capabilities().can_train}});
    });
    server.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      handle_score(req, res);
    });
    server.Post("/train", [this](const httplib::Request& req, httplib::Response& res) {
      handle_train(req, res);
    });
  }

  void handle_score(const httplib::Request& req, httplib::Response& res) {
    if (busy_left.load() > 0 && busy_left.fetch_sub(1) > 0) {
      reply_error(res, 503, "busy");
      return;
    }
    ScoreBatch batch;
    try {
      const json j = json::parse(req.body);
      batch.task = parse_task(j.at("task").get<std::string>());
      batch.prompts = j.at("prompts").get<std::vector<std::string>>();
    } catch (const std::exception& e) {
      reply_error(res, 400, std::string("malformed /score request: ") + e.what());
      return;
    }
    if (batch.prompts.empty()) {
      reply_error(res, 400, "prompts must be non-empty");
      return;
    }
    std::shared_lock lock(model_mutex, std::try_to_lock);
    if (!lock.owns_lock()) {
      reply_error(res, 503, "training in progress");
      return;
    }
    try {
      std::vector<double> scores = backend->score(batch);
      for (double& s : scores) s = std::clamp(s, 0.0, 1.0);
      reply_json(res, 200, json{{"scores", scores}});
    } catch (const std::exception& e) {
      reply_error(res, 400, e.what());
    }
  }

  void handle_train(const httplib::Request& req, httplib::Response& res) {
    if (!backend->capabilities().can_train) {
      reply_error(res, 400, "backend " + backend->identity() + " cannot train");
      return;
    }
    Task task;
    std::vector<TrainingExample> examples;
    int epochs = 0;
    try {
      const json j = json::parse(req.body);
      task = parse_task(j.at("task").get<std::string>());
      epochs = j.at("epochs").get<int>();
      for (const auto& ex : j.at("examples")) {
        examples.push_back({ex.at("prompt").get<std::string>(), ex.at("label").get<int>()});
      }
    } catch (const std::exception& e) {
      reply_error(res, 400, std::string("malformed /train request: ") + e.what());
      return;
    }
    std::unique_lock train_lock(train_mutex, std::try_to_lock);
    if (!train_lock.owns_lock()) {
      reply_error(res, 503, "training in progress");
      return;
    }
    std::unique_lock lock(model_mutex);
    try {
      const double loss = fit(*backend, task, examples, epochs);
      reply_json(res, 200, json{{"final_loss", loss}});
    } catch (const std::exception& e) {
      reply_error(res, 400, e.what());
    }
  }

  void bind(const std::string& h, int p) {
    host = h;
    if (p == 0) {
      port = server.bind_to_any_port(h);
    } else if (server.bind_to_port(h, p)) {
      port = p;
    } else {
      port = -1;
    }
    if (port <= 0) {
      throw IoError("cannot bind mock service to " + h + ":" + std::to_string(p));
    }
  }
};

MockScoringService::MockScoringService(std::unique_ptr<ScorerBackend> backend,
                                       MockServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->backend = std::move(backend);
  impl_->options = options;
  impl_->busy_left = options.busy_responses;
  impl_->install();
}

MockScoringService::~MockScoringService() { stop(); }

int MockScoringService::start(const std::string& host, int port) {
  impl_->bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void MockScoringService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockScoringService::endpoint() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

}  // namespace catkb
