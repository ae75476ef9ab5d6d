#include <gtest/gtest.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <nlohmann/json.hpp>
#include <sstream>

#include "support/fixtures.hpp"
#include "varembed/core/errors.hpp"
#include "varembed/core/half.hpp"
#include "varembed/core/hash.hpp"
#include "varembed/core/line_source.hpp"
#include "varembed/core/rng.hpp"
#include "varembed/core/serialize.hpp"
#include "varembed/core/types.hpp"
#include "varembed/core/variant_key.hpp"

using namespace varembed;
using nlohmann::json;

namespace {

json load_json(const std::string& rel) { return json::parse(test::read_file(test::fixture_path(rel))); }

std::vector<unsigned char> pattern_bytes(std::size_t n) {
  std::vector<unsigned char> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<unsigned char>((i * 31 + 7) & 0xff);
  return v;
}

}  // namespace

TEST(Xxh64, MatchesReferenceVectors) {
  const auto j = load_json("core/xxh64.json");
  ASSERT_GT(j["cases"].size(), 200u);
  for (const auto& c : j["cases"]) {
    const auto data = pattern_bytes(c["len"].get<std::size_t>());
    const std::uint64_t seed = std::stoull(c["seed"].get<std::string>());
    const std::uint64_t expected = std::stoull(c["hash"].get<std::string>(), nullptr, 16);
    EXPECT_EQ(xxh64(data.data(), data.size(), seed), expected) << "len=" << data.size() << " seed=" << seed;
  }
}

TEST(Xxh64, StreamingEqualsOneShotForAnySplit) {
  const auto data = pattern_bytes(300);
  for (std::size_t chunk : {1u, 3u, 7u, 31u, 32u, 33u, 64u, 299u}) {
    Xxh64Stream s(77);
    for (std::size_t off = 0; off < data.size(); off += chunk) {
      s.update(data.data() + off, std::min(chunk, data.size() - off));
    }
    EXPECT_EQ(s.digest(), xxh64(data.data(), data.size(), 77)) << chunk;
  }
}

TEST(Half, MatchesNumpyConversion) {
  const auto j = load_json("core/half.json");
  ASSERT_GT(j.size(), 100u);
  for (const auto& pair : j) {
    const auto fbits = pair[0].get<std::uint32_t>();
    const auto hbits = pair[1].get<std::uint16_t>();
    float f;
    std::memcpy(&f, &fbits, 4);
    if (std::isnan(f)) {
      EXPECT_TRUE(std::isnan(half_to_float(float_to_half(f))));
      continue;
    }
    EXPECT_EQ(float_to_half(f), hbits) << fbits;
  }
}

TEST(Half, RoundTripsEveryFiniteHalf) {
  for (std::uint32_t h = 0; h < 0x10000; ++h) {
    const auto bits = static_cast<std::uint16_t>(h);
    if (((bits >> 10) & 0x1f) == 0x1f && (bits & 0x3ff)) continue;  // NaN payloads
    EXPECT_EQ(float_to_half(half_to_float(bits)), bits) << h;
  }
}

TEST(Chromosome, AliasesNormalize) {
  EXPECT_EQ(Chromosome::from_label("chr5").label(), "5");
  EXPECT_EQ(Chromosome::from_label("CHRX").label(), "X");
  EXPECT_EQ(Chromosome::from_label("chrM").label(), "MT");
  EXPECT_EQ(Chromosome::from_label("M").label(), "MT");
  EXPECT_EQ(Chromosome::from_label("22").rank(), 21);
  EXPECT_THROW(Chromosome::from_label("23"), UnknownChromosome);
  EXPECT_THROW(Chromosome::from_label("chrUn_gl000220"), UnknownChromosome);
  EXPECT_TRUE(Chromosome::from_label("22").is_autosome());
  EXPECT_FALSE(Chromosome::from_label("Y").is_autosome());
}

TEST(VariantKey, ParseAndFormatRoundTrip) {
  const auto k = VariantKey::parse("5-148992859-C-A");
  EXPECT_EQ(k.chromosome().label(), "5");
  EXPECT_EQ(k.position(), 148992859u);
  EXPECT_EQ(k.ref(), "C");
  EXPECT_EQ(k.alt(), "A");
  EXPECT_EQ(k.to_string(), "5-148992859-C-A");
  EXPECT_TRUE(k.is_snv());
  EXPECT_EQ(VariantKey::parse("chr5-148992859-C-A").to_string(), "5-148992859-C-A");
}

TEST(VariantKey, RejectsInvalid) {
  EXPECT_THROW(VariantKey::parse("5-0-C-A"), InvalidVariant);
  EXPECT_THROW(VariantKey::parse("5-10-C-C"), InvalidVariant);
  EXPECT_THROW(VariantKey::parse("5-10-C-N"), InvalidVariant);
  EXPECT_THROW(VariantKey::parse("5-10-C"), InvalidVariant);
  EXPECT_THROW(VariantKey::parse("Q-10-C-A"), UnknownChromosome);
  EXPECT_FALSE(VariantKey::try_parse("garbage").has_value());
}

TEST(VariantKey, FlipIsAnInvolution) {
  const auto k = VariantKey::make("7", 100, "AC", "T", "rs12");
  EXPECT_EQ(k.flipped().to_string(), "7-100-T-AC");
  EXPECT_EQ(k.flipped().flipped(), k);
  EXPECT_EQ(k.flipped().rsid(), k.rsid());
  EXPECT_TRUE(k.is_indel());
}

TEST(VariantKey, EqualityIgnoresRsid) {
  EXPECT_EQ(VariantKey::make("1", 5, "A", "G", "rs1"), VariantKey::make("1", 5, "A", "G", std::nullopt));
}

TEST(VariantKey, SortBytesPreserveCanonicalOrder) {
  Rng rng(5);
  const char* bases = "ACGT";
  std::vector<VariantKey> keys;
  for (int i = 0; i < 3000; ++i) {
    std::string ref(1 + rng.uniform(3), 'A'), alt(1 + rng.uniform(3), 'A');
    for (auto& c : ref) c = bases[rng.uniform(4)];
    for (auto& c : alt) c = bases[rng.uniform(4)];
    if (ref == alt) continue;
    keys.push_back(VariantKey::make(std::string(Chromosome::from_rank(int(rng.uniform(25))).label()),
                                    static_cast<std::uint32_t>(1 + rng.uniform(3000)), ref, alt));
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    const auto& a = keys[i];
    const auto& b = keys[i + 1];
    // Reference ordering: (chromosome rank, position, ref, alt).
    auto ra = std::make_tuple(a.chromosome().rank(), a.position(), a.ref(), a.alt());
    auto rb = std::make_tuple(b.chromosome().rank(), b.position(), b.ref(), b.alt());
    const int expected = ra < rb ? -1 : (rb < ra ? 1 : 0);
    const int via_cmp = a < b ? -1 : (b < a ? 1 : 0);
    const int c = a.sort_bytes().compare(b.sort_bytes());
    const int via_bytes = c < 0 ? -1 : (c > 0 ? 1 : 0);
    EXPECT_EQ(via_cmp, expected) << a.to_string() << " vs " << b.to_string();
    EXPECT_EQ(via_bytes, expected) << a.to_string() << " vs " << b.to_string();
  }
}

TEST(Rng, DeterministicAndBounded) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
  Rng r(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto u = r.uniform(7);
    ASSERT_LT(u, 7u);
    ++counts[u];
  }
  for (int c2 : counts) EXPECT_NEAR(c2, 10000, 500);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(LineSource, ReadsPlainAndGzipIdentically) {
  test::TempDir tmp;
  const std::string text = "a\tb\r\nsecond line\n\nlast";
  test::write_file(tmp / "plain.tsv", text);
  gzFile gz = gzopen((tmp / "packed.tsv.gz").c_str(), "wb");
  gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
  gzclose(gz);
  auto collect = [](LineSource& src) {
    std::vector<std::string> lines;
    std::string l;
    while (src.next_line(l)) lines.push_back(l);
    return lines;
  };
  FileLineSource plain(tmp / "plain.tsv");
  FileLineSource packed(tmp / "packed.tsv.gz");
  const auto a = collect(plain);
  EXPECT_EQ(a, collect(packed));
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0], "a\tb");
  EXPECT_EQ(a[3], "last");
}

TEST(Serialize, JoinedVariantRoundTrip) {
  JoinedVariant v{VariantKey::make("2", 9, "G", "T", "rs9"), {}, {}, {}, true};
  v.functional.gencode_category = GencodeCategory::Exonic;
  v.functional.gencode_info = "BRCA2";
  v.functional.cadd_phred = 12.25;
  v.functional.cage = "p1@BRCA2";
  ClinVarRecord c;
  c.clinical_significance = ClinicalSignificance::LikelyPathogenic;
  c.conditions = {"Fanconi anemia"};
  c.review_status = {2, "criteria provided, multiple submitters, no conflicts"};
  v.clinvar.push_back(c);
  GwasAssociation g;
  g.trait = "Height";
  g.p_value = 3e-12;
  v.gwas.push_back(g);
  const auto back = joined_from_json(to_json(v));
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.key.rsid(), v.key.rsid());
}

TEST(Errors, CategoriesMapToExitCodes) {
  EXPECT_EQ(ConfigError("x").category(), ErrorCategory::Config);
  EXPECT_EQ(DuplicateKey("x").category(), ErrorCategory::Data);
  EXPECT_EQ(BackendUnavailable("x").category(), ErrorCategory::Backend);
  EXPECT_EQ(MalformedRow("position", "x").reason(), "position");
}
