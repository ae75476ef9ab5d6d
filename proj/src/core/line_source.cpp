#include "varembed/core/line_source.hpp"

#include <zlib.h>

#include <cstring>

#include "varembed/core/errors.hpp"

namespace varembed {
namespace {

void strip_eol(std::string& line) {
  if (!line.empty() && line.back() == '\n') line.pop_back();
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

bool StreamLineSource::next_line(std::string& line) {
  if (!std::getline(in_, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

FileLineSource::FileLineSource(const std::filesystem::path& path) {
  handle_ = gzopen(path.c_str(), "rb");
  if (handle_ == nullptr) throw IoError("cannot open " + path.string());
  gzbuffer(static_cast<gzFile>(handle_), 1 << 16);
  buffer_.resize(1 << 14);
}

FileLineSource::~FileLineSource() {
  if (handle_ != nullptr) gzclose(static_cast<gzFile>(handle_));
}

bool FileLineSource::next_line(std::string& line) {
  auto file = static_cast<gzFile>(handle_);
  line.clear();
  bool got_any = false;
  for (;;) {
    char* r = gzgets(file, buffer_.data(), static_cast<int>(buffer_.size()));
    if (r == nullptr) {
      int err = 0;
      const char* msg = gzerror(file, &err);
      if (err != Z_OK && err != Z_STREAM_END) throw IoError(std::string("gzip read: ") + msg);
      break;
    }
    got_any = true;
    std::size_t n = std::strlen(buffer_.data());
    line.append(buffer_.data(), n);
    if (n > 0 && buffer_[n - 1] == '\n') break;
  }
  if (!got_any) return false;
  strip_eol(line);
  return true;
}

std::unique_ptr<LineSource> open_lines(const std::filesystem::path& path) {
  return std::make_unique<FileLineSource>(path);
}

}  // namespace varembed
