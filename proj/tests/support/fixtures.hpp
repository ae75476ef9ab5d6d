#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace varembed::test {

std::filesystem::path fixture_path(const std::string& relative);
std::filesystem::path data_path(const std::string& relative);
std::filesystem::path tools_path(const std::string& relative);
std::filesystem::path cli_path();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "varembed-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string out;  // stdout
  std::string err;  // stderr
  long max_rss_kb = 0;
};

/// Runs the CLI binary with `args` (no shell).
CliResult run_cli(const std::vector<std::string>& args);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace varembed::test
