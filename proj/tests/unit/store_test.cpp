#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"
#include "varembed/core/errors.hpp"
#include "varembed/core/half.hpp"
#include "varembed/core/rng.hpp"
#include "varembed/store/store.hpp"

using namespace varembed;
using namespace varembed::store;

namespace {

struct Corpus {
  std::vector<std::string> keys;  // canonical order
  std::vector<std::vector<float>> values;
};

Corpus make_corpus(std::size_t n, std::size_t dim, std::uint64_t seed = 11) {
  Rng rng(seed);
  std::vector<VariantKey> keys;
  for (std::size_t i = 0; i < n; ++i) {
    auto chrom = Chromosome::from_rank(static_cast<int>(rng.uniform(Chromosome::kCount)));
    keys.push_back(VariantKey::make(chrom.label(), 1 + static_cast<std::uint32_t>(i * 97 + rng.uniform(90)),
                                    "A", rng.uniform(2) ? "G" : "CT"));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  Corpus c;
  for (const auto& k : keys) {
    c.keys.push_back(k.to_string());
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(rng.unit() * 2 - 1);
    c.values.push_back(std::move(v));
  }
  return c;
}

Manifest write(const Corpus& c, const std::filesystem::path& dir, WriteOptions opts = {}) {
  StoreWriter w(dir, c.values.at(0).size(), "test-model", opts);
  for (std::size_t i = 0; i < c.keys.size(); ++i) w.add(c.keys[i], c.values[i]);
  return w.finish();
}

std::vector<std::pair<std::string, std::vector<float>>> scan_all(const EmbeddingStore& s, KeyRange r = {}) {
  std::vector<std::pair<std::string, std::vector<float>>> out;
  s.scan(r, [&](std::string_view k, std::span<const float> v) { out.emplace_back(std::string(k), std::vector(v.begin(), v.end())); });
  return out;
}

}  // namespace

TEST(Store, RoundTripIsExactForF32) {
  test::TempDir tmp;
  const auto c = make_corpus(3000, 24);
  const auto m = write(c, tmp / "s");
  auto s = EmbeddingStore::open(tmp / "s");
  EXPECT_EQ(s.manifest(), m);
  EXPECT_EQ(s.size(), c.keys.size());
  EXPECT_EQ(s.dim(), 24u);
  for (std::size_t i = 0; i < c.keys.size(); ++i) {
    auto v = s.get(c.keys[i]);
    ASSERT_TRUE(v) << c.keys[i];
    EXPECT_EQ(*v, c.values[i]);
  }
  EXPECT_FALSE(s.get("22-1-A-T"));
  EXPECT_TRUE(s.verify().empty());
  const auto all = scan_all(s);
  ASSERT_EQ(all.size(), c.keys.size());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].first, c.keys[i]);
}

TEST(Store, ShardSizeDoesNotChangeContents) {
  test::TempDir tmp;
  const auto c = make_corpus(1500, 8);
  std::vector<std::vector<std::pair<std::string, std::vector<float>>>> scans;
  for (std::uint64_t per : {1ull, 7ull, 1000ull}) {
    const auto dir = tmp / ("s" + std::to_string(per));
    const auto m = write(c, dir, {per});
    EXPECT_EQ(m.shards.size(), (c.keys.size() + per - 1) / per);
    auto s = EmbeddingStore::open(dir);
    scans.push_back(scan_all(s));
    EXPECT_EQ(*s.get(c.keys[777]), c.values[777]);
    EXPECT_TRUE(s.verify().empty());
  }
  EXPECT_EQ(scans[0], scans[1]);
  EXPECT_EQ(scans[1], scans[2]);
}

TEST(Store, ChromosomeRangeScan) {
  test::TempDir tmp;
  const auto c = make_corpus(2000, 4);
  write(c, tmp / "s", {50});
  auto s = EmbeddingStore::open(tmp / "s");
  std::size_t want = 0;
  for (const auto& k : c.keys) want += VariantKey::parse(k).chromosome().label() == std::string("X");
  const auto got = scan_all(s, KeyRange::chromosome(Chromosome::from_label("X")));
  EXPECT_EQ(got.size(), want);
  for (const auto& [k, v] : got) EXPECT_EQ(k.rfind("X-", 0), 0u);
}

TEST(Store, CorruptionIsDetected) {
  test::TempDir tmp;
  const auto c = make_corpus(200, 8);
  const auto m = write(c, tmp / "s", {100});
  const auto shard = tmp / "s" / m.shards[1].file_name;
  {
    std::fstream f(shard, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    char b = 0;
    f.read(&b, 1);
    f.seekp(40);
    b ^= 0x10;
    f.write(&b, 1);
  }
  auto s = EmbeddingStore::open(tmp / "s");
  EXPECT_TRUE(s.get(c.keys[0]));  // first shard intact
  EXPECT_THROW(s.get(c.keys[150]), ChecksumError);
  EXPECT_FALSE(s.verify().empty());

  std::filesystem::resize_file(tmp / "s" / m.shards[0].file_name, 100);
  auto t = EmbeddingStore::open(tmp / "s");
  EXPECT_THROW(t.get(c.keys[0]), ChecksumError);
}

TEST(Store, MissingManifestIsFormatError) {
  test::TempDir tmp;
  EXPECT_THROW(EmbeddingStore::open(tmp / "nothing"), FormatError);
  const auto c = make_corpus(10, 4);
  StoreWriter w(tmp / "partial", 4, "m");
  w.add(c.keys[0], c.values[0]);
  // No finish(): readers must not see a store.
  EXPECT_THROW(EmbeddingStore::open(tmp / "partial"), FormatError);
}

TEST(Store, WriterRejectsBadInput) {
  test::TempDir tmp;
  StoreWriter w(tmp / "s", 3, "m");
  const std::vector<float> ok = {1, 2, 3}, wrong = {1, 2};
  w.add("2-10-A-G", ok);
  EXPECT_THROW(w.add("1-10-A-G", ok), UnsortedInput);
  EXPECT_THROW(w.add("2-10-A-G", ok), UnsortedInput);
  EXPECT_THROW(w.add("2-20-A-G", wrong), DimMismatch);
  const std::vector<float> nan = {1, std::nanf(""), 3};
  EXPECT_THROW(w.add("2-30-A-G", nan), DimMismatch);
  // Canonical, not lexicographic: chromosome 10 sorts after 9.
  w.add("9-1-A-G", ok);
  w.add("10-1-A-G", ok);
  EXPECT_EQ(w.finish().record_count, 3u);
}

TEST(Store, HalfPrecisionMatchesConversion) {
  test::TempDir tmp;
  const auto c = make_corpus(300, 16);
  WriteOptions opts;
  opts.dtype = DType::F16;
  write(c, tmp / "s", opts);
  auto s = EmbeddingStore::open(tmp / "s");
  EXPECT_EQ(s.manifest().record_size(), kKeyBytes + 32);
  for (std::size_t i = 0; i < c.keys.size(); ++i) {
    auto v = *s.get(c.keys[i]);
    for (std::size_t d = 0; d < 16; ++d) EXPECT_EQ(v[d], half_to_float(float_to_half(c.values[i][d])));
  }
}

TEST(Store, NormalizeAndLongKeys) {
  test::TempDir tmp;
  WriteOptions opts;
  opts.normalize = true;
  StoreWriter w(tmp / "s", 2, "m", opts);
  const std::string long_key = "1-100-" + std::string(40, 'A') + "-T";
  w.add("1-50-A-G", std::vector<float>{3, 4});
  w.add(long_key, std::vector<float>{0, 2});
  w.finish();
  auto s = EmbeddingStore::open(tmp / "s");
  EXPECT_EQ(*s.get("1-50-A-G"), (std::vector<float>{0.6f, 0.8f}));
  EXPECT_EQ(*s.get(long_key), (std::vector<float>{0, 1}));
  EXPECT_TRUE(s.manifest().normalized);
  EXPECT_EQ(scan_all(s)[1].first, long_key);
}

TEST(Store, SampleKeysUseByteOrder) {
  test::TempDir tmp;
  WriteOptions opts;
  opts.key_kind = KeyKind::Sample;
  StoreWriter w(tmp / "s", 1, "m", opts);
  for (const char* id : {"S10", "S2", "S3"}) w.add(id, std::vector<float>{1});
  w.finish();
  auto s = EmbeddingStore::open(tmp / "s");
  EXPECT_EQ(s.manifest().key_kind, KeyKind::Sample);
  EXPECT_TRUE(s.contains("S2"));
}

TEST(Store, ExportImportRoundTrip) {
  test::TempDir tmp;
  const auto c = make_corpus(500, 6);
  write(c, tmp / "s", {64});
  auto s = EmbeddingStore::open(tmp / "s");
  std::stringstream jsonl;
  EXPECT_EQ(export_store(s, jsonl, ExportFormat::Jsonl), c.keys.size());
  // Reverse the lines: import must sort.
  std::vector<std::string> lines;
  for (std::string l; std::getline(jsonl, l);) lines.push_back(l);
  std::reverse(lines.begin(), lines.end());
  std::stringstream reversed;
  for (const auto& l : lines) reversed << l << "\n";
  ImportOptions io;
  io.model_id = "test-model";
  io.write.records_per_shard = 64;
  const auto m = import_jsonl(reversed, tmp / "t", io);
  EXPECT_EQ(m.record_count, c.keys.size());
  auto t = EmbeddingStore::open(tmp / "t");
  EXPECT_EQ(scan_all(t), scan_all(s));
  EXPECT_EQ(t.manifest().shards, s.manifest().shards);

  std::stringstream tsv;
  export_store(s, tsv, ExportFormat::Tsv);
  std::string first;
  std::getline(tsv, first);
  EXPECT_EQ(first.substr(0, first.find('\t')), c.keys[0]);

  std::stringstream dup(lines[0] + "\n" + lines[0] + "\n");
  EXPECT_THROW(import_jsonl(dup, tmp / "u", io), DuplicateKey);
  std::stringstream junk("{not json\n");
  EXPECT_THROW(import_jsonl(junk, tmp / "v", io), FormatError);
  EXPECT_THROW(parse_export_format("parquet"), ConfigError);
}
