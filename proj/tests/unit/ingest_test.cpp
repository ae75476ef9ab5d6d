#include <gtest/gtest.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "support/fixtures.hpp"
#include "varembed/core/errors.hpp"
#include "varembed/core/line_source.hpp"
#include "varembed/core/rng.hpp"
#include "varembed/ingest/parsers.hpp"
#include "varembed/ingest/review_tiers.hpp"
#include "varembed/ingest/schema.hpp"
#include "varembed/pipeline/stages.hpp"

using namespace varembed;
using namespace varembed::ingest;

namespace {

const char* kFavorHeader =
    "chromosome\tposition\tref_vcf\talt_vcf\trsid\tgenecode_comprehensive_category\t"
    "genecode_comprehensive_info\tmetasvm_pred\tcadd_phred\tcage_promoter\tgenehancer\trdhs\n";
const char* kClinvarHeader = "CHROM\tPOS\tREF\tALT\tRS\tCLNSIG\tCLNDN\tCLNREVSTAT\n";
const char* kGwasHeader = "CHR_ID\tCHR_POS\tREF\tALT\tSNPS\tDISEASE/TRAIT\tP-VALUE\tSTUDY ACCESSION\n";

SourceSchema schema(const std::string& name) {
  return SourceSchema::load(test::data_path("schemas/" + name + ".json"));
}

template <typename Parser, typename... Extra>
std::pair<std::vector<typename std::remove_cvref_t<decltype(std::declval<Parser&>().drain())>::value_type>,
          SkipReport>
parse_text(const std::string& text, const SourceSchema& s, ParseOptions opts, Extra&&... extra) {
  std::istringstream in(text);
  StreamLineSource src(in);
  Parser p(src, s, std::forward<Extra>(extra)..., opts);
  auto items = p.drain();
  return {std::move(items), p.report()};
}

auto parse_favor(const std::string& text, bool strict = false) {
  return parse_text<FavorParser>(text, schema("favor"), ParseOptions{strict});
}
auto parse_clinvar(const std::string& text, bool strict = false) {
  return parse_text<ClinVarParser>(text, schema("clinvar"), ParseOptions{strict}, ReviewTierTable::load_default());
}
auto parse_gwas(const std::string& text, bool strict = false) {
  return parse_text<GwasParser>(text, schema("gwas"), ParseOptions{strict});
}

}  // namespace

TEST(FavorParser, FigureOneVariant) {
  const std::string text = std::string(kFavorHeader) + "5\t148992859\tC\tA\t.\tintergenic\tGENE_X\t.\t12.3\t.\t.\t.\n";
  auto [records, report] = parse_favor(text);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].key.to_string(), "5-148992859-C-A");
  ASSERT_TRUE(records[0].functional.cadd_phred);
  EXPECT_DOUBLE_EQ(*records[0].functional.cadd_phred, 12.3);
  EXPECT_EQ(records[0].functional.gencode_info, "GENE_X");
  EXPECT_EQ(records[0].functional.gencode_category, GencodeCategory::Intergenic);
  EXPECT_FALSE(records[0].functional.metasvm);
  EXPECT_FALSE(records[0].key.rsid());
  EXPECT_EQ(report.skipped, 0u);
}

TEST(FavorParser, EmptyInputYieldsNothing) {
  auto [records, report] = parse_favor("");
  EXPECT_TRUE(records.empty());
  EXPECT_EQ(report.total, 0u);
  EXPECT_EQ(report.skipped, 0u);
  auto [r2, rep2] = parse_favor(kFavorHeader);
  EXPECT_TRUE(r2.empty());
}

TEST(FavorParser, CorruptedRowsAreCountedByReason) {
  // 1,000 rows, 7 corrupted in distinct ways at generator-chosen lines.
  Rng rng(99);
  const std::map<std::size_t, std::string> corrupt = {
      {17, "column_count"}, {130, "position"}, {222, "cadd_phred"}, {404, "allele"},
      {512, "chromosome"},  {777, "gencode_category"}, {950, "metasvm"}};
  std::string text = kFavorHeader;
  std::map<std::string, std::uint64_t> expected;
  for (std::size_t i = 0; i < 1000; ++i) {
    std::string chrom = std::to_string(1 + rng.uniform(22));
    std::string pos = std::to_string(1000 + i * 17);
    std::string ref = "A", alt = "G", cat = "exonic", svm = "T", cadd = "10.5";
    std::string extra;
    if (auto it = corrupt.find(i); it != corrupt.end()) {
      const auto& why = it->second;
      ++expected[why];
      if (why == "column_count") extra = "\tSPARE";
      if (why == "position") pos = "12x";
      if (why == "cadd_phred") cadd = "high";
      if (why == "allele") alt = "N";
      if (why == "chromosome") chrom = "chr99";
      if (why == "gencode_category") cat = "weird_region";
      if (why == "metasvm") svm = "maybe";
    }
    text += chrom + "\t" + pos + "\t" + ref + "\t" + alt + "\trs" + std::to_string(i + 1) + "\t" + cat +
            "\tGENE\t" + svm + "\t" + cadd + "\t.\t.\t." + extra + "\n";
  }
  auto [records, report] = parse_favor(text);
  EXPECT_EQ(records.size(), 993u);
  EXPECT_EQ(report.total, 1000u);
  EXPECT_EQ(report.valid, 993u);
  EXPECT_EQ(report.skipped, 7u);
  EXPECT_EQ(report.valid + report.skipped, report.total);
  EXPECT_EQ(report.reasons, expected);

  EXPECT_THROW(parse_favor(text, /*strict=*/true), MalformedRow);
}

TEST(FavorParser, MultiAllelicRowsSplitPerAlt) {
  const std::string text = std::string(kFavorHeader) + "chr2\t500\tc\tA,t\trs77\texonic\tG1\tD\t3\t.\t.\t.\n";
  auto [records, report] = parse_favor(text);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].key.to_string(), "2-500-C-A");
  EXPECT_EQ(records[1].key.to_string(), "2-500-C-T");
  EXPECT_EQ(records[1].key.rsid(), "rs77");
  EXPECT_EQ(report.valid, 1u);
  EXPECT_EQ(report.records, 2u);
}

TEST(FavorParser, NonIntergenicNeedsGene) {
  const std::string text = std::string(kFavorHeader) + "2\t500\tC\tA\t.\texonic\t.\t.\t.\t.\t.\t.\n";
  auto [records, report] = parse_favor(text);
  EXPECT_TRUE(records.empty());
  EXPECT_EQ(report.reasons.at("gencode_info"), 1u);
}

TEST(FavorParser, DeterministicOverFixture) {
  const auto text = test::read_file(test::fixture_path("join/favor.tsv"));
  auto a = parse_favor(text);
  auto b = parse_favor(text);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.first.size(), 500u);
  EXPECT_EQ(a.second.skipped, 0u);
}

TEST(Schema, HeaderlessIndexedColumnsWithZeroBase) {
  auto s = SourceSchema::from_json(nlohmann::json::parse(R"({
    "source_kind": "favor", "delimiter": ",", "has_header": false, "position_base": 0,
    "columns": {"chromosome": 0, "position": 1, "ref": 2, "alt": 3, "gencode_category": 4,
                "gencode_info": 5, "cadd_phred": 6}})"));
  std::istringstream in("X,99,G,C,intronic,AR,1.5\n");
  StreamLineSource src(in);
  FavorParser p(src, s);
  auto recs = p.drain();
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].key.to_string(), "X-100-G-C");
}

TEST(Schema, MissingMandatoryFieldIsConfigError) {
  EXPECT_THROW(SourceSchema::from_json(nlohmann::json::parse(
                   R"({"source_kind": "clinvar", "columns": {"chromosome": "C", "position": "P"}})")),
               ConfigError);
  EXPECT_THROW(SourceSchema::from_json(nlohmann::json::parse(R"({"source_kind": "nope", "columns": {}})")),
               ConfigError);
}

TEST(Schema, BundledSchemasRoundTrip) {
  for (const char* name : {"favor", "clinvar", "gwas"}) {
    const auto s = schema(name);
    EXPECT_EQ(SourceSchema::from_json(s.to_json()).to_json(), s.to_json()) << name;
  }
}

TEST(Schema, HeaderLackingColumnIsConfigError) {
  EXPECT_THROW(parse_favor("chromosome\tposition\n1\t2\n"), ConfigError);
}

TEST(ReviewTiers, PublicStarDefinitions) {
  const auto t = ReviewTierTable::load_default();
  const std::vector<std::pair<std::string, int>> table = {
      {"practice guideline", 4},
      {"reviewed by expert panel", 3},
      {"criteria provided, multiple submitters, no conflicts", 2},
      {"criteria provided, conflicting interpretations", 1},
      {"criteria provided, conflicting classifications", 1},
      {"criteria provided, single submitter", 1},
      {"no assertion criteria provided", 0},
      {"no assertion provided", 0},
      {"no interpretation for the single variant", 0},
      {"criteria_provided,_multiple_submitters,_no_conflicts", 2},
      {"  Reviewed  By Expert_Panel ", 3},
  };
  for (const auto& [status, tier] : table) {
    auto r = t.lookup(status);
    ASSERT_TRUE(r) << status;
    EXPECT_EQ(r->tier, tier) << status;
  }
  EXPECT_FALSE(t.lookup("four stars please"));
}

TEST(ClinVarParser, TierMappingAndConditions) {
  const std::string text = std::string(kClinvarHeader) +
                           "1\t100\tA\tG\t12345\tPathogenic\tFamilial_disease_Y\t"
                           "criteria_provided,_multiple_submitters,_no_conflicts\n"
                           "1\t200\tA\tG\t.\tBenign\t.\tpractice_guideline\n"
                           "1\t300\tA\tG\t.\tSomewhat_bad\tX\tpractice_guideline\n";
  auto [records, report] = parse_clinvar(text);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].record.clinical_significance, ClinicalSignificance::Pathogenic);
  EXPECT_EQ(records[0].record.review_status.tier, 2);
  EXPECT_EQ(records[0].record.conditions, std::vector<std::string>{"Familial_disease_Y"});
  EXPECT_EQ(records[0].key.rsid(), "rs12345");
  EXPECT_TRUE(records[1].record.conditions.empty());
  EXPECT_EQ(records[1].record.review_status.tier, 4);
  EXPECT_EQ(report.reasons.at("significance"), 1u);
}

TEST(ClinVarParser, FixtureParsesCleanly) {
  auto [records, report] = parse_clinvar(test::read_file(test::fixture_path("join/clinvar.tsv")));
  EXPECT_EQ(report.total, 80u);
  EXPECT_EQ(report.skipped, 0u);
  EXPECT_EQ(records.size(), 80u);
}

TEST(GwasParser, PValuesAgreeWithIndependentParser) {
  const std::vector<std::string> ps = {"3e-12", "3E-12", "0.05", "1", "1.0", "9.6E-59", "2.2250738585072014e-308",
                                       "5e-324", "0.000123", "7.5e-8"};
  std::string text = kGwasHeader;
  for (const auto& p : ps) text += "1\t10\tA\tG\trs12345\tType 2 diabetes\t" + p + "\tGCST1\n";
  auto [records, report] = parse_gwas(text);
  ASSERT_EQ(records.size(), ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ASSERT_TRUE(records[i].association.p_value) << ps[i];
    EXPECT_EQ(*records[i].association.p_value, std::strtod(ps[i].c_str(), nullptr)) << ps[i];
    EXPECT_EQ(records[i].association.trait, "Type 2 diabetes");
    EXPECT_EQ(records[i].rsid, "rs12345");
  }
}

TEST(GwasParser, OutOfRangePValuesBecomeMissingWithWarning) {
  std::string text = kGwasHeader;
  for (const char* p : {"0", "1.5", "-1e-3", "1e-400"}) text += std::string("1\t10\tA\tG\t.\tT\t") + p + "\t.\n";
  text += "1\t10\tA\tG\t.\tT\tnot_a_number\t.\n";
  auto [records, report] = parse_gwas(text);
  ASSERT_EQ(records.size(), 4u);
  for (const auto& r : records) EXPECT_FALSE(r.association.p_value);
  EXPECT_EQ(report.warnings.at("p_value_out_of_range"), 4u);
  EXPECT_EQ(report.reasons.at("p_value"), 1u);
}

TEST(GwasParser, DuplicatesAndRsidOnlyRows) {
  const std::string text = std::string(kGwasHeader) +
                           "1\t10\tA\tG\trs5\tHeight\t1e-9\tA\n"
                           "1\t10\tA\tG\trs5\tHeight\t1e-10\tB\n"
                           "\t\t\t\trs6\tAsthma\t2e-8\tC\n"
                           "\t\t\t\t\tAsthma\t2e-8\tC\n";
  auto [records, report] = parse_gwas(text);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_TRUE(records[0].key && records[1].key);
  EXPECT_FALSE(records[2].key);
  EXPECT_EQ(records[2].rsid, "rs6");
  EXPECT_EQ(report.reasons.at("variant_id"), 1u);
}

TEST(IngestStage, GzipInputMatchesPlain) {
  test::TempDir tmp;
  const auto plain = pipeline::ingest_file(SourceKind::Favor, pipeline::default_schema(SourceKind::Favor),
                                           test::fixture_path("join/favor.tsv"), tmp / "a.rec");
  ASSERT_EQ(std::system(("gzip -c '" + test::fixture_path("join/favor.tsv").string() + "' > '" +
                         (tmp / "f.tsv.gz").string() + "'")
                            .c_str()),
            0);
  const auto packed =
      pipeline::ingest_file(SourceKind::Favor, pipeline::default_schema(SourceKind::Favor), tmp / "f.tsv.gz", tmp / "b.rec");
  EXPECT_EQ(plain.to_json(), packed.to_json());
  EXPECT_EQ(test::read_file(tmp / "a.rec"), test::read_file(tmp / "b.rec"));
}

TEST(IngestStage, WrongSchemaKindIsConfigError) {
  test::TempDir tmp;
  EXPECT_THROW(pipeline::ingest_file(SourceKind::Favor, pipeline::default_schema(SourceKind::ClinVar),
                                     test::fixture_path("join/favor.tsv"), tmp / "a.rec"),
               ConfigError);
}

TEST(IngestStage, PeakMemoryIndependentOfInputSize) {
  test::TempDir tmp;
  auto make = [&](const std::string& name, std::size_t rows) {
    std::string text = kFavorHeader;
    for (std::size_t i = 0; i < rows; ++i) {
      text += std::to_string(1 + i % 22) + "\t" + std::to_string(1000 + i) +
              "\tA\tG\trs1\texonic\tGENE\tT\t10.5\t.\t.\t.\n";
    }
    test::write_file(tmp / name, text);
  };
  make("small.tsv", 20000);
  make("large.tsv", 200000);
  auto run = [&](const std::string& name) {
    auto r = test::run_cli({"ingest", "--source", "favor", "--input", (tmp / name).string(), "--out",
                            (tmp / (name + ".rec")).string(), "--report", (tmp / (name + ".json")).string()});
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return r.max_rss_kb;
  };
  const long small = run("small.tsv");
  const long large = run("large.tsv");
  // 10x rows (~5 MB more input) must not grow the resident set materially.
  EXPECT_LT(large, small + 2048) << "small=" << small << "KB large=" << large << "KB";
}
