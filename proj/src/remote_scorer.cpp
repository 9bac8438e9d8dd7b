#include <algorithm>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "catkb/error.hpp"
#include "catkb/remote.hpp"

namespace catkb {

namespace {

using nlohmann::json;

struct Reply {
  int status = 0;
  std::string body;
};

bool retryable(int status) { return status >= 500; }

json parse_reply(const Reply& reply, const std::string& route) {
  try {
    return json::parse(reply.body);
  } catch (const json::exception& e) {
    throw ProtocolError(route + " answered with malformed JSON: " + e.what());
  }
}

}  // namespace

RemoteScorer::RemoteScorer(RemoteOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ConfigError("remote scorer needs an endpoint");
  if (options_.attempts < 1) throw ConfigError("remote scorer needs at least one attempt");
  if (options_.max_batch == 0) throw ConfigError("remote max_batch must be positive");
  std::string url = options_.endpoint;
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint needs a scheme: " + url);
  if (url.substr(0, scheme) != "http") {
    throw ConfigError("only http endpoints are supported: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  host_ = url.substr(0, slash);
  if (slash != std::string::npos) {
    prefix_ = url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

namespace {

Reply send(const std::string& host, const std::string& path, const std::string* body,
           const RemoteOptions& options, std::chrono::seconds timeout) {
  auto delay = options.backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= options.attempts; ++attempt) {
    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = body ? client.Post(path, *body, "application/json") : client.Get(path);
    if (res && !retryable(res->status)) return Reply{res->status, res->body};
    last_error = res ? "HTTP " + std::to_string(res->status)
                     : "connection failed (" + httplib::to_string(res.error()) + ")";
    if (attempt < options.attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw TransportError(host + path + " unavailable after " + std::to_string(options.attempts) +
                       " attempts: " + last_error);
}

}  // namespace

RemoteScorer::Health RemoteScorer::health() const {
  const std::string route = prefix_ + "/health";
  const Reply reply = send(host_, route, nullptr, options_, options_.timeout);
  if (reply.status != 200) {
    throw ProtocolError(route + " answered HTTP " + std::to_string(reply.status));
  }
  const json j = parse_reply(reply, route);
  Health h;
  try {
    h.status = j.at("status").get<std::string>();
    h.identity = j.at("identity").get<std::string>();
    if (j.contains("can_train")) h.can_train = j.at("can_train").get<bool>();
  } catch (const json::exception& e) {
    throw ProtocolError(route + " answer lacks required fields: " + e.what());
  }
  return h;
}

const RemoteScorer::Health& RemoteScorer::cached_health() const {
  std::lock_guard lock(health_mutex_);
  if (!health_) health_ = health();
  return *health_;
}

Capabilities RemoteScorer::capabilities() const { return {cached_health().can_train}; }

std::string RemoteScorer::identity() const { return "remote:" + cached_health().identity; }

std::vector<double> RemoteScorer::score(const ScoreBatch& batch) const {
  const std::string route = prefix_ + "/score";
  std::vector<double> out;
  out.reserve(batch.prompts.size());
  for (std::size_t begin = 0; begin < batch.prompts.size(); begin += options_.max_batch) {
    const std::size_t end = std::min(batch.prompts.size(), begin + options_.max_batch);
    json request = {{"task", std::string(to_string(batch.task))},
                    {"prompts", json::array()}};
    for (std::size_t i = begin; i < end; ++i) request["prompts"].push_back(batch.prompts[i]);
    const std::string body = request.dump();
    const Reply reply = send(host_, route, &body, options_, options_.timeout);
    if (reply.status != 200) {
      throw ProtocolError(route + " answered HTTP " + std::to_string(reply.status) + ": " +
                          reply.body);
    }
    const json j = parse_reply(reply, route);
    std::vector<double> scores;
    try {
      scores = j.at("scores").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ProtocolError(route + " answer lacks a numeric \"scores\" array: " + e.what());
    }
    if (scores.size() != end - begin) {
      throw ProtocolError(route + " returned " + std::to_string(scores.size()) +
                          " scores for " + std::to_string(end - begin) + " prompts");
    }
    for (double s : scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw ProtocolError(route + " returned score " + std::to_string(s) + " outside [0, 1]");
      }
    }
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

double RemoteScorer::train(Task task, const std::vector<TrainingExample>& examples, int epochs) {
  const std::string route = prefix_ + "/train";
  json request = {{"task", std::string(to_string(task))},
                  {"examples", json::array()},
                  {"epochs", epochs}};
  for (const auto& ex : examples) {
    request["examples"].push_back({{"prompt", ex.prompt}, {"label", ex.label}});
  }
  const std::string body = request.dump();
  const Reply reply = send(host_, route, &body, options_, options_.train_timeout);
  if (reply.status == 400 && !cached_health().can_train) {
    throw CapabilityError("remote backend cannot train: " + reply.body);
  }
  if (reply.status != 200) {
    throw ProtocolError(route + " answered HTTP " + std::to_string(reply.status) + ": " +
                        reply.body);
  }
  const json j = parse_reply(reply, route);
  try {
    return j.at("final_loss").get<double>();
  } catch (const json::exception& e) {
    throw ProtocolError(route + " answer lacks \"final_loss\": " + e.what());
  }
}

}  // namespace catkb
