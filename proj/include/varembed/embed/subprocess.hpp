#pragma once

#include <cstdio>
#include <filesystem>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <sys/types.h>
#include <vector>

#include "varembed/embed/backend.hpp"

namespace varembed::embed {

struct SubprocessConfig {
  std::vector<std::string> command;
  std::size_t dim = 0;
  std::string model_id = "subprocess";

  static SubprocessConfig from_json(const nlohmann::json& j);
  static SubprocessConfig load(const std::filesystem::path& path);
};

/// Local-model adapter speaking JSON lines over the child's stdin/stdout:
/// request {"id", "text"}, reply {"id", "vec"}, one item at a time.
class SubprocessBackend final : public Backend {
 public:
  explicit SubprocessBackend(SubprocessConfig config);
  ~SubprocessBackend() override;
  SubprocessBackend(const SubprocessBackend&) = delete;
  SubprocessBackend& operator=(const SubprocessBackend&) = delete;

  std::vector<EmbeddingVector> embed(const std::vector<EmbedItem>& batch) override;
  std::size_t dim() const override { return config_.dim; }
  std::string model_id() const override { return config_.model_id; }
  bool concurrent() const override { return false; }

 private:
  std::string read_line();

  SubprocessConfig config_;
  pid_t pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
  std::mutex mutex_;
};

}  // namespace varembed::embed
