#include "varembed/join/external_sort.hpp"

#include <algorithm>
#include <atomic>
#include <unistd.h>

#include "varembed/core/errors.hpp"

namespace varembed::join {
namespace {

void put_str(std::ostream& out, const std::string& s) {
  auto n = static_cast<std::uint32_t>(s.size());
  char b[4] = {static_cast<char>(n & 0xff), static_cast<char>((n >> 8) & 0xff),
               static_cast<char>((n >> 16) & 0xff), static_cast<char>((n >> 24) & 0xff)};
  out.write(b, 4);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

bool get_str(std::istream& in, std::string& s) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() == 0) return false;
  if (in.gcount() != 4) throw FormatError("truncated sort run");
  std::uint32_t n = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  s.resize(n);
  in.read(s.data(), n);
  if (static_cast<std::uint32_t>(in.gcount()) != n) throw FormatError("truncated sort run");
  return true;
}

class RunReader {
 public:
  explicit RunReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open sort run " + path.string());
    load();
  }
  const SortEntry* peek() const { return done_ ? nullptr : &current_; }
  void advance() { load(); }

 private:
  void load() {
    if (!get_str(in_, current_.key)) {
      done_ = true;
      return;
    }
    if (!get_str(in_, current_.payload)) throw FormatError("truncated sort run");
  }
  std::ifstream in_;
  SortEntry current_;
  bool done_ = false;
};

class MemoryStream final : public SortedStream {
 public:
  explicit MemoryStream(std::vector<SortEntry> entries) : entries_(std::move(entries)) {}
  const SortEntry* peek() override { return pos_ < entries_.size() ? &entries_[pos_] : nullptr; }
  void advance() override { ++pos_; }

 private:
  std::vector<SortEntry> entries_;
  std::size_t pos_ = 0;
};

class MergeStream final : public SortedStream {
 public:
  MergeStream(const std::vector<std::filesystem::path>& runs) {
    for (const auto& r : runs) readers_.push_back(std::make_unique<RunReader>(r));
    for (std::size_t i = 0; i < readers_.size(); ++i) {
      if (readers_[i]->peek()) heap_.push(i);
    }
  }
  const SortEntry* peek() override {
    if (heap_.empty()) return nullptr;
    return readers_[heap_.top()]->peek();
  }
  void advance() override {
    std::size_t i = heap_.top();
    heap_.pop();
    readers_[i]->advance();
    if (readers_[i]->peek()) heap_.push(i);
  }

 private:
  struct Greater {
    const MergeStream* self;
    bool operator()(std::size_t a, std::size_t b) const {
      const SortEntry& ea = *self->readers_[a]->peek();
      const SortEntry& eb = *self->readers_[b]->peek();
      if (eb < ea) return true;
      if (ea < eb) return false;
      return a > b;
    }
  };
  std::vector<std::unique_ptr<RunReader>> readers_;
  std::priority_queue<std::size_t, std::vector<std::size_t>, Greater> heap_{Greater{this}};
};

std::atomic<std::uint64_t> g_scratch_counter{0};

}  // namespace

ExternalSorter::ExternalSorter(std::filesystem::path tmp_dir, std::size_t max_run_bytes)
    : tmp_dir_(std::move(tmp_dir)), max_run_bytes_(std::max<std::size_t>(max_run_bytes, 1)) {
  std::filesystem::create_directories(tmp_dir_);
}

ExternalSorter::~ExternalSorter() {
  for (const auto& r : runs_) {
    std::error_code ec;
    std::filesystem::remove(r, ec);
  }
}

void ExternalSorter::add(std::string key, std::string payload) {
  if (finished_) throw PreconditionError("ExternalSorter::add after sorted()");
  buffered_bytes_ += key.size() + payload.size() + 16;
  buffer_.push_back(SortEntry{std::move(key), std::move(payload)});
  ++total_;
  if (buffered_bytes_ >= max_run_bytes_) spill();
}

void ExternalSorter::spill() {
  if (buffer_.empty()) return;
  std::sort(buffer_.begin(), buffer_.end());
  auto path = tmp_dir_ / ("run-" + std::to_string(g_scratch_counter++) + ".bin");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create sort run " + path.string());
  for (const auto& e : buffer_) {
    put_str(out, e.key);
    put_str(out, e.payload);
  }
  out.flush();
  if (!out) throw IoError("write failed for sort run " + path.string());
  runs_.push_back(path);
  buffer_.clear();
  buffer_.shrink_to_fit();
  buffered_bytes_ = 0;
}

std::unique_ptr<SortedStream> ExternalSorter::sorted() {
  if (finished_) throw PreconditionError("ExternalSorter::sorted called twice");
  finished_ = true;
  if (runs_.empty()) {
    std::sort(buffer_.begin(), buffer_.end());
    return std::make_unique<MemoryStream>(std::move(buffer_));
  }
  spill();
  return std::make_unique<MergeStream>(runs_);
}

RunWriter::RunWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot create run " + path.string());
}

void RunWriter::add(const std::string& key, const std::string& payload) {
  put_str(out_, key);
  put_str(out_, payload);
}

void RunWriter::close() {
  out_.flush();
  if (!out_) throw IoError("write failed for run " + path_.string());
  out_.close();
}

namespace {

class RunStream final : public SortedStream {
 public:
  explicit RunStream(const std::filesystem::path& path) : reader_(path) {}
  const SortEntry* peek() override { return reader_.peek(); }
  void advance() override { reader_.advance(); }

 private:
  RunReader reader_;
};

}  // namespace

std::unique_ptr<SortedStream> open_run(const std::filesystem::path& path) {
  return std::make_unique<RunStream>(path);
}

ScratchDir::ScratchDir(const std::filesystem::path& parent) {
  path_ = parent / ("varembed-scratch-" + std::to_string(::getpid()) + "-" +
                    std::to_string(g_scratch_counter++));
  std::filesystem::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace varembed::join
