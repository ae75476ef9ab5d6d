#include "varembed/embed/subprocess.hpp"

#include <csignal>
#include <cstring>
#include <fstream>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "varembed/core/errors.hpp"

extern char** environ;

namespace varembed::embed {

using nlohmann::json;

SubprocessConfig SubprocessConfig::from_json(const json& j) {
  SubprocessConfig c;
  try {
    c.command = j.at("command").get<std::vector<std::string>>();
    c.dim = j.at("dim").get<std::size_t>();
    c.model_id = j.value("model_id", c.model_id);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("subprocess backend config: ") + e.what());
  }
  if (c.command.empty()) throw ConfigError("subprocess backend config: empty command");
  if (c.dim == 0) throw ConfigError("subprocess backend config: dim must be positive");
  return c;
}

SubprocessConfig SubprocessConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open subprocess config " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("subprocess config " + path.string() + ": " + e.what());
  }
}

SubprocessBackend::SubprocessBackend(SubprocessConfig config) : config_(std::move(config)) {
  // A dead child must surface as an error, not kill us with SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw BackendUnavailable("pipe() failed");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
  std::vector<char*> argv;
  for (auto& a : config_.command) argv.push_back(a.data());
  argv.push_back(nullptr);
  const int rc = posix_spawnp(&pid_, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw BackendUnavailable("cannot start " + config_.command[0] + ": " + std::strerror(rc));
  }
  to_child_ = fdopen(in_pipe[1], "w");
  from_child_ = fdopen(out_pipe[0], "r");
}

SubprocessBackend::~SubprocessBackend() {
  if (to_child_) fclose(to_child_);
  if (from_child_) fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::string SubprocessBackend::read_line() {
  std::string line;
  char buf[65536];
  while (fgets(buf, sizeof buf, from_child_)) {
    line += buf;
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      return line;
    }
  }
  throw BackendUnavailable("embedding subprocess closed its output");
}

std::vector<EmbeddingVector> SubprocessBackend::embed(const std::vector<EmbedItem>& batch) {
  if (batch.empty()) throw PreconditionError("embed: empty batch");
  std::lock_guard lock(mutex_);
  std::vector<EmbeddingVector> out;
  out.reserve(batch.size());
  for (const auto& item : batch) {
    const auto request = json{{"id", item.key}, {"text", item.text}}.dump() + "\n";
    if (fputs(request.c_str(), to_child_) < 0 || fflush(to_child_) != 0) {
      throw BackendUnavailable("embedding subprocess is not accepting input");
    }
    json reply;
    try {
      reply = json::parse(read_line());
    } catch (const json::parse_error& e) {
      throw PartialBatch(std::string("subprocess reply is not JSON: ") + e.what());
    }
    if (!reply.contains("id") || reply["id"] != item.key || !reply.contains("vec")) {
      throw PartialBatch("subprocess reply does not match request id " + std::string(item.key));
    }
    EmbeddingVector v;
    v.model_id = config_.model_id;
    try {
      v.values = reply["vec"].get<std::vector<float>>();
    } catch (const json::exception&) {
      throw DimMismatch("subprocess vector for " + std::string(item.key) + " is not numeric");
    }
    v.validate(config_.dim);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace varembed::embed
