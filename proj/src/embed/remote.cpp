#include "varembed/embed/remote.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "varembed/core/errors.hpp"
#include "varembed/core/log.hpp"
#include "varembed/core/rng.hpp"

namespace varembed::embed {

using nlohmann::json;

RemoteConfig RemoteConfig::from_json(const json& j) {
  RemoteConfig c;
  try {
    c.endpoint = j.at("endpoint").get<std::string>();
    c.model_id = j.at("model_id").get<std::string>();
    c.auth_env_var = j.value("auth_env_var", std::string());
    c.dim = j.at("dim").get<std::size_t>();
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_base_ms = j.value("backoff_base_ms", c.backoff_base_ms);
    c.rate_limit_rps = j.value("rate_limit_rps", c.rate_limit_rps);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.jitter_seed = j.value("jitter_seed", c.jitter_seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("remote backend config: ") + e.what());
  }
  if (j.contains("api_key") || j.contains("token")) {
    throw ConfigError("remote backend config must not hold credentials; name an env var in auth_env_var");
  }
  if (c.dim == 0) throw ConfigError("remote backend config: dim must be positive");
  if (c.max_retries < 0 || c.backoff_base_ms < 0 || c.rate_limit_rps < 0 || c.timeout_ms <= 0) {
    throw ConfigError("remote backend config: negative retry/backoff/rate settings");
  }
  return c;
}

RemoteConfig RemoteConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open remote config " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("remote config " + path.string() + ": " + e.what());
  }
}

RateLimiter::RateLimiter(double rps, std::chrono::milliseconds margin)
    : capacity_(rps > 0 ? static_cast<std::size_t>(std::floor(rps)) : 0), margin_(margin) {
  if (rps > 0 && capacity_ == 0) capacity_ = 1;
}

void RateLimiter::acquire() {
  if (capacity_ == 0) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = Clock::now();
    const auto window = std::chrono::seconds(1) + margin_;
    while (!starts_.empty() && now - starts_.front() >= window) starts_.pop_front();
    if (starts_.size() < capacity_) {
      starts_.push_back(now);
      return;
    }
    const auto wake = starts_.front() + window;
    lock.unlock();
    std::this_thread::sleep_until(wake);
    lock.lock();
  }
}

std::chrono::milliseconds backoff_delay(int base_ms, int retry, std::uint64_t jitter_draw) {
  const std::int64_t scheduled = static_cast<std::int64_t>(base_ms) << std::min(retry, 30);
  const std::int64_t jitter_span = scheduled / 2;
  const std::int64_t jitter =
      jitter_span > 0 ? static_cast<std::int64_t>(jitter_draw % static_cast<std::uint64_t>(jitter_span + 1)) : 0;
  return std::chrono::milliseconds(scheduled + jitter);
}

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), limiter_(config_.rate_limit_rps), dim_(config_.dim),
      jitter_state_(config_.jitter_seed) {
  const auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) throw ConfigError("remote endpoint needs a scheme: " + config_.endpoint);
  const auto slash = config_.endpoint.find('/', scheme + 3);
  scheme_host_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
  if (!config_.auth_env_var.empty()) {
    const char* token = std::getenv(config_.auth_env_var.c_str());
    if (!token || !*token) {
      throw ConfigError("environment variable " + config_.auth_env_var + " (remote credential) is not set");
    }
    token_ = token;
  }
  sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

RemoteBackend::~RemoteBackend() = default;

std::size_t RemoteBackend::dim() const { return dim_; }

std::vector<AttemptRecord> RemoteBackend::attempts() const {
  std::lock_guard lock(mutex_);
  return attempts_;
}

void RemoteBackend::set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
  sleeper_ = std::move(sleeper);
}

namespace {

std::vector<EmbeddingVector> parse_response(const std::string& body, std::size_t expected,
                                            std::size_t dim, const std::string& model) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw PartialBatch(std::string("unparseable embedding response: ") + e.what());
  }
  if (!j.is_object() || !j.contains("data") || !j["data"].is_array()) {
    throw PartialBatch("embedding response lacks a data array");
  }
  const auto& data = j["data"];
  if (data.size() != expected) {
    throw PartialBatch("requested " + std::to_string(expected) + " embeddings, received " +
                       std::to_string(data.size()));
  }
  std::vector<EmbeddingVector> out(expected);
  std::vector<bool> seen(expected, false);
  for (const auto& item : data) {
    if (!item.contains("index") || !item["index"].is_number_integer() || !item.contains("embedding") ||
        !item["embedding"].is_array()) {
      throw PartialBatch("malformed embedding item");
    }
    const auto idx = item["index"].get<std::int64_t>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= expected || seen[static_cast<std::size_t>(idx)]) {
      throw PartialBatch("embedding indices are not a permutation of the request");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    EmbeddingVector v;
    v.model_id = model;
    v.values.reserve(item["embedding"].size());
    for (const auto& x : item["embedding"]) {
      if (!x.is_number()) throw DimMismatch("non-numeric embedding value");
      v.values.push_back(x.get<float>());
    }
    v.validate(dim);
    out[static_cast<std::size_t>(idx)] = std::move(v);
  }
  return out;
}

bool retryable(int status) { return status == 429 || (status >= 500 && status <= 599); }

}  // namespace

std::vector<EmbeddingVector> RemoteBackend::embed(const std::vector<EmbedItem>& batch) {
  if (batch.empty()) throw PreconditionError("embed: empty batch");
  json input = json::array();
  for (const auto& item : batch) input.push_back(item.text);
  const std::string body = json{{"model", config_.model_id}, {"input", input}}.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    std::chrono::milliseconds delay{0};
    if (attempt > 0) {
      std::uint64_t draw;
      {
        std::lock_guard lock(mutex_);
        draw = splitmix64(jitter_state_);
      }
      delay = backoff_delay(config_.backoff_base_ms, attempt - 1, draw);
      sleeper_(delay);
    }
    limiter_.acquire();
    httplib::Client client(scheme_host_);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    if (!token_.empty()) client.set_bearer_token_auth(token_);
    auto res = client.Post(path_, body, "application/json");
    const int status = res ? res->status : 0;
    {
      std::lock_guard lock(mutex_);
      attempts_.push_back({attempt + 1, status, delay});
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      log::warn("embed_retry", {{"attempt", attempt + 1}, {"error", last_error}});
      continue;
    }
    if (status == 200) return parse_response(res->body, batch.size(), dim_, config_.model_id);
    last_error = "HTTP " + std::to_string(status);
    if (!retryable(status)) throw BackendUnavailable("embedding endpoint rejected request: " + last_error);
    log::warn("embed_retry", {{"attempt", attempt + 1}, {"status", status}});
  }
  throw BackendUnavailable("embedding endpoint failed after " + std::to_string(config_.max_retries + 1) +
                           " attempts: " + last_error);
}

}  // namespace varembed::embed
