#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <queue>
#include <string>
#include <vector>

namespace varembed::join {

/// A (sort key, payload) pair. Streams order entries by key, then payload, so
/// output is independent of insertion order.
struct SortEntry {
  std::string key;
  std::string payload;

  friend bool operator<(const SortEntry& a, const SortEntry& b) {
    if (int c = a.key.compare(b.key); c != 0) return c < 0;
    return a.payload < b.payload;
  }
};

/// Pull stream over sorted entries.
class SortedStream {
 public:
  virtual ~SortedStream() = default;
  /// Current entry, or nullptr at end.
  virtual const SortEntry* peek() = 0;
  virtual void advance() = 0;
};

/// Bounded-memory sorter: buffers up to `max_run_bytes`, spills sorted runs to
/// `tmp_dir`, and k-way merges them on read. Run files are removed with the sorter.
class ExternalSorter {
 public:
  ExternalSorter(std::filesystem::path tmp_dir, std::size_t max_run_bytes);
  ~ExternalSorter();
  ExternalSorter(const ExternalSorter&) = delete;
  ExternalSorter& operator=(const ExternalSorter&) = delete;

  void add(std::string key, std::string payload);
  /// Ends the write phase. Only one stream may be opened per sorter.
  std::unique_ptr<SortedStream> sorted();

  std::size_t run_count() const noexcept { return runs_.size(); }
  std::uint64_t size() const noexcept { return total_; }

 private:
  void spill();

  std::filesystem::path tmp_dir_;
  std::size_t max_run_bytes_;
  std::vector<SortEntry> buffer_;
  std::size_t buffered_bytes_ = 0;
  std::vector<std::filesystem::path> runs_;
  std::uint64_t total_ = 0;
  bool finished_ = false;
};

/// Writes already-sorted entries to a run file readable with open_run().
class RunWriter {
 public:
  explicit RunWriter(const std::filesystem::path& path);
  void add(const std::string& key, const std::string& payload);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::unique_ptr<SortedStream> open_run(const std::filesystem::path& path);

/// Unique scratch directory under `parent`, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& parent);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace varembed::join
