#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "catkb/scorer.hpp"

namespace catkb {

struct RemoteOptions {
  std::string endpoint;  // "http://host:port" with an optional path prefix
  int attempts = 3;
  std::chrono::milliseconds backoff{250};  // doubled after every failed attempt
  std::size_t max_batch = 256;             // prompts per /score request
  std::chrono::seconds timeout{60};
  std::chrono::seconds train_timeout{3600};
};

/// Client for the JSON-over-HTTP scoring protocol (/score, /train, /health).
///
/// Connection failures and 5xx answers are retried; after the last attempt the call throws
/// TransportError. A malformed or inconsistent answer throws ProtocolError at once.
class RemoteScorer final : public ScorerBackend {
 public:
  explicit RemoteScorer(RemoteOptions options);

  /// From the /health answer; a service that omits "can_train" is assumed trainable.
  Capabilities capabilities() const override;
  /// "remote:" + the identity the service reports.
  std::string identity() const override;
  std::vector<double> score(const ScoreBatch& batch) const override;
  double train(Task task, const std::vector<TrainingExample>& examples, int epochs) override;

  struct Health {
    std::string status;
    std::string identity;
    bool can_train = true;
  };
  Health health() const;

 private:
  const Health& cached_health() const;

  RemoteOptions options_;
  std::string host_;
  std::string prefix_;
  mutable std::mutex health_mutex_;
  mutable std::optional<Health> health_;
};

struct MockServiceOptions {
  /// The first `busy_responses` /score requests are answered 503.
  int busy_responses = 0;
};

/// In-process HTTP service that exposes a local backend over the scoring protocol.
///
/// /score runs concurrently; /train is exclusive and /score answers 503 while it runs.
/// A backend that cannot train answers /train with 400.
class MockScoringService {
 public:
  explicit MockScoringService(std::unique_ptr<ScorerBackend> backend,
                              MockServiceOptions options = {});
  ~MockScoringService();

  MockScoringService(const MockScoringService&) = delete;
  MockScoringService& operator=(const MockScoringService&) = delete;

  /// Binds (port 0 picks a free one), serves on a background thread, returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  std::string endpoint() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace catkb
