#pragma once

#include <filesystem>
#include <istream>
#include <memory>
#include <string>

namespace varembed {

/// Pull-based line reader; strips the trailing "\n" / "\r\n".
class LineSource {
 public:
  virtual ~LineSource() = default;
  virtual bool next_line(std::string& line) = 0;
};

class StreamLineSource final : public LineSource {
 public:
  explicit StreamLineSource(std::istream& in) : in_(in) {}
  bool next_line(std::string& line) override;

 private:
  std::istream& in_;
};

/// Reads plain or gzip-compressed files transparently (zlib detects the header).
class FileLineSource final : public LineSource {
 public:
  explicit FileLineSource(const std::filesystem::path& path);
  ~FileLineSource() override;
  FileLineSource(const FileLineSource&) = delete;
  FileLineSource& operator=(const FileLineSource&) = delete;

  bool next_line(std::string& line) override;

 private:
  void* handle_ = nullptr;  // gzFile
  std::string buffer_;
};

std::unique_ptr<LineSource> open_lines(const std::filesystem::path& path);

}  // namespace varembed
