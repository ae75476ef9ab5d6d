#include "varembed/embed/journal.hpp"

#include <cstring>

#include "varembed/core/errors.hpp"
#include "varembed/core/hash.hpp"

namespace varembed::embed {
namespace {

constexpr char kMagic[8] = {'V', 'E', 'J', 'R', 'N', 'L', '0', '1'};
constexpr std::size_t kHeaderSize = 8 + 8 + 4 + 4;

template <typename T>
void put(std::string& buf, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  buf.append(b, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t at) {
  T v;
  std::memcpy(&v, buf.data() + at, sizeof(T));
  return v;
}

}  // namespace

Journal::Journal(std::filesystem::path path, std::uint64_t fingerprint, std::uint32_t dim)
    : path_(std::move(path)), dim_(dim) {
  std::string contents;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    contents.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::size_t good = 0;
  if (contents.size() >= kHeaderSize && std::memcmp(contents.data(), kMagic, 8) == 0) {
    if (get<std::uint64_t>(contents, 8) != fingerprint || get<std::uint32_t>(contents, 16) != dim) {
      throw ConfigError("journal " + path_.string() +
                        " belongs to a different embedding plan; remove it to start over");
    }
    good = kHeaderSize;
    while (good + 8 <= contents.size()) {
      const auto batch = get<std::uint32_t>(contents, good);
      const auto count = get<std::uint32_t>(contents, good + 4);
      const std::size_t payload = static_cast<std::size_t>(count) * dim * 4;
      const std::size_t total = 8 + payload + 8;
      if (batch != recovered_.size() || good + total > contents.size()) break;
      if (xxh64(contents.data() + good, 8 + payload) != get<std::uint64_t>(contents, good + 8 + payload)) break;
      Entry e;
      e.batch = batch;
      e.values.resize(static_cast<std::size_t>(count) * dim);
      std::memcpy(e.values.data(), contents.data() + good + 8, payload);
      recovered_.push_back(std::move(e));
      good += total;
    }
  } else if (!contents.empty() && contents.size() >= 8 && std::memcmp(contents.data(), kMagic, 8) != 0) {
    throw ConfigError(path_.string() + " is not an embedding journal");
  }
  if (good == 0) {
    std::string header(kMagic, 8);
    put(header, fingerprint);
    put(header, dim);
    put(header, std::uint32_t{0});
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    if (!out) throw IoError("cannot create journal " + path_.string());
  } else if (good < contents.size()) {
    truncated_ = contents.size() - good;
    std::filesystem::resize_file(path_, good);
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw IoError("cannot open journal " + path_.string());
}

void Journal::append(std::uint32_t batch, const std::vector<float>& values) {
  if (values.size() % dim_ != 0) throw PreconditionError("journal entry is not a whole number of vectors");
  std::string buf;
  put(buf, batch);
  put(buf, static_cast<std::uint32_t>(values.size() / dim_));
  buf.append(reinterpret_cast<const char*>(values.data()), values.size() * 4);
  put(buf, xxh64(buf.data(), buf.size()));
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out_.flush();
  if (!out_) throw IoError("journal append failed for " + path_.string());
}

}  // namespace varembed::embed
