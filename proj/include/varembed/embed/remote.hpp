#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "varembed/embed/backend.hpp"

namespace varembed::embed {

struct RemoteConfig {
  std::string endpoint;  // full URL, e.g. http://127.0.0.1:8080/v1/embeddings
  std::string model_id;
  /// Environment variable holding the bearer token; empty disables auth.
  std::string auth_env_var;
  std::size_t dim = 0;  // required; every response must match
  int max_retries = 5;
  int backoff_base_ms = 500;
  double rate_limit_rps = 0.0;  // 0 = unlimited
  int timeout_ms = 30000;
  std::uint64_t jitter_seed = 0;

  static RemoteConfig from_json(const nlohmann::json& j);
  static RemoteConfig load(const std::filesystem::path& path);
};

/// Sliding-window limiter: at most `rps` acquisitions in any 1-second window.
/// The window is padded by `margin` to absorb client-to-server latency jitter.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  explicit RateLimiter(double rps, std::chrono::milliseconds margin = std::chrono::milliseconds(50));
  /// Blocks until a request may start.
  void acquire();

 private:
  std::size_t capacity_;
  std::chrono::milliseconds margin_;
  std::mutex mutex_;
  std::deque<Clock::time_point> starts_;
};

/// Delay before retry k (0-based): base * 2^k plus jitter in [0, base * 2^k / 2].
std::chrono::milliseconds backoff_delay(int base_ms, int retry, std::uint64_t jitter_draw);

struct AttemptRecord {
  int attempt = 0;
  int status = 0;  // HTTP status, or 0 for a transport failure
  std::chrono::milliseconds delay_before{0};
};

class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  ~RemoteBackend() override;

  std::vector<EmbeddingVector> embed(const std::vector<EmbedItem>& batch) override;
  std::size_t dim() const override;
  std::string model_id() const override { return config_.model_id; }

  /// Attempt log of every request issued so far.
  std::vector<AttemptRecord> attempts() const;
  /// Replaces sleeping between retries (tests record instead of waiting).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

 private:
  RemoteConfig config_;
  std::string scheme_host_;
  std::string path_;
  std::string token_;
  RateLimiter limiter_;
  mutable std::mutex mutex_;
  std::size_t dim_;
  std::uint64_t jitter_state_;
  std::vector<AttemptRecord> attempts_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
};

}  // namespace varembed::embed
