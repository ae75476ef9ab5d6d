#pragma once

#include <nlohmann/json.hpp>
#include <string_view>

namespace varembed::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

void set_level(Level level);
Level parse_level(std::string_view text);

/// Emits one JSON object per line on stderr: {"ts", "level", "event", ...fields}.
void emit(Level level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

inline void debug(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::Debug, event, std::move(fields));
}
inline void info(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::Info, event, std::move(fields));
}
inline void warn(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::Warn, event, std::move(fields));
}
inline void error(std::string_view event, nlohmann::json fields = nlohmann::json::object()) {
  emit(Level::Error, event, std::move(fields));
}

}  // namespace varembed::log
