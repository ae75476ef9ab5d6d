#include "varembed/core/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "varembed/core/errors.hpp"

namespace varembed::log {
namespace {

std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_logger_mt("varembed");
    // Message bodies are already JSON; the pattern only wraps the timestamp.
    l->set_pattern(R"({"ts":"%Y-%m-%dT%H:%M:%S.%eZ",%v})", spdlog::pattern_time_type::utc);
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return instance;
}

spdlog::level::level_enum to_spd(Level level) {
  switch (level) {
    case Level::Debug: return spdlog::level::debug;
    case Level::Info: return spdlog::level::info;
    case Level::Warn: return spdlog::level::warn;
    case Level::Error: return spdlog::level::err;
    case Level::Off: return spdlog::level::off;
  }
  return spdlog::level::info;
}

std::string_view name(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: return "off";
  }
  return "info";
}

}  // namespace

void set_level(Level level) { logger()->set_level(to_spd(level)); }

Level parse_level(std::string_view text) {
  if (text == "debug") return Level::Debug;
  if (text == "info") return Level::Info;
  if (text == "warn") return Level::Warn;
  if (text == "error") return Level::Error;
  if (text == "off") return Level::Off;
  throw ConfigError("unknown log level '" + std::string(text) + "'");
}

void emit(Level level, std::string_view event, nlohmann::json fields) {
  auto l = logger();
  if (!l->should_log(to_spd(level))) return;
  nlohmann::json body = nlohmann::json::object();
  body["level"] = name(level);
  body["event"] = event;
  for (auto& [k, v] : fields.items()) body[k] = v;
  std::string text = body.dump();
  // Strip the outer braces; the pattern supplies them around the timestamp.
  l->log(to_spd(level), "{}", std::string_view(text).substr(1, text.size() - 2));
}

}  // namespace varembed::log
