#include "support/fixtures.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

extern char** environ;

namespace varembed::test {

namespace fs = std::filesystem;

fs::path fixture_path(const std::string& relative) { return fs::path(VAREMBED_FIXTURE_DIR) / relative; }
fs::path data_path(const std::string& relative) { return fs::path(VAREMBED_TEST_DATA_DIR) / relative; }
fs::path tools_path(const std::string& relative) { return fs::path(VAREMBED_TOOLS_DIR) / relative; }
fs::path cli_path() { return VAREMBED_CLI_PATH; }

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  path_ = fs::temp_directory_path() /
          (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

CliResult run_cli(const std::vector<std::string>& args) {
  TempDir tmp("varembed-cli");
  const auto out_path = tmp / "stdout";
  const auto err_path = tmp / "stderr";
  std::vector<std::string> argv_store{cli_path().string()};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, 2, err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw std::runtime_error("cannot spawn " + argv_store[0]);
  int status = 0;
  struct rusage usage {};
  wait4(pid, &status, 0, &usage);
  CliResult r;
  r.max_rss_kb = usage.ru_maxrss;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

}  // namespace varembed::test
