#include "varembed/store/recfile.hpp"

#include <array>
#include <cstring>

#include "varembed/core/errors.hpp"
#include "varembed/core/hash.hpp"

namespace varembed::store {
namespace {

constexpr char kMagic[8] = {'V', 'E', 'R', 'E', 'C', 'F', 'I', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (in.gcount() != 4) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace

std::string_view to_string(RecordKind kind) noexcept {
  switch (kind) {
    case RecordKind::Generic: return "generic";
    case RecordKind::Favor: return "favor";
    case RecordKind::ClinVar: return "clinvar";
    case RecordKind::Gwas: return "gwas";
    case RecordKind::Joined: return "joined";
  }
  return "generic";
}

RecordWriter::RecordWriter(std::filesystem::path path, RecordKind kind)
    : path_(std::move(path)), partial_(path_.string() + ".partial") {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(partial_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot create " + partial_.string());
  out_.write(kMagic, sizeof kMagic);
  put_u32(out_, kVersion);
  put_u32(out_, static_cast<std::uint32_t>(kind));
}

RecordWriter::~RecordWriter() {
  if (!closed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(partial_, ec);
  }
}

void RecordWriter::write(const nlohmann::json& record) {
  auto bytes = nlohmann::json::to_cbor(record);
  write_bytes(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void RecordWriter::write_bytes(std::string_view payload) {
  put_u32(out_, static_cast<std::uint32_t>(payload.size()));
  out_.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  put_u32(out_, static_cast<std::uint32_t>(xxh64(payload)));
  ++count_;
}

void RecordWriter::close() {
  if (closed_) return;
  out_.flush();
  if (!out_) throw IoError("write failed for " + partial_.string());
  out_.close();
  std::filesystem::rename(partial_, path_);
  closed_ = true;
}

RecordReader::RecordReader(const std::filesystem::path& path, std::optional<RecordKind> expected)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open " + path.string());
  char magic[8];
  in_.read(magic, 8);
  std::uint32_t version = 0, kind = 0;
  if (in_.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0 || !get_u32(in_, version) ||
      !get_u32(in_, kind)) {
    throw FormatError(path.string() + " is not a record file");
  }
  if (version != kVersion) throw FormatError("unsupported record file version");
  kind_ = static_cast<RecordKind>(kind);
  if (expected && *expected != kind_) {
    throw FormatError(path.string() + " holds " + std::string(to_string(kind_)) +
                      " records, expected " + std::string(to_string(*expected)));
  }
}

bool RecordReader::next_bytes(std::string& payload) {
  std::uint32_t len = 0;
  if (!get_u32(in_, len)) {
    if (in_.gcount() == 0) return false;
    throw FormatError(path_.string() + ": truncated frame header");
  }
  payload.resize(len);
  in_.read(payload.data(), len);
  std::uint32_t check = 0;
  if (static_cast<std::uint32_t>(in_.gcount()) != len || !get_u32(in_, check)) {
    throw FormatError(path_.string() + ": truncated frame " + std::to_string(index_));
  }
  if (check != static_cast<std::uint32_t>(xxh64(payload))) {
    throw ChecksumError(path_.string() + ": frame " + std::to_string(index_));
  }
  ++index_;
  return true;
}

bool RecordReader::next(nlohmann::json& record) {
  std::string payload;
  if (!next_bytes(payload)) return false;
  record = nlohmann::json::from_cbor(payload);
  return true;
}

}  // namespace varembed::store
