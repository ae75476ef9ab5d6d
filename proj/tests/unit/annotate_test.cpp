#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "varembed/annotate/template.hpp"
#include "varembed/annotate/tokenizer.hpp"
#include "varembed/core/errors.hpp"
#include "varembed/core/rng.hpp"
#include "varembed/pipeline/stages.hpp"

using namespace varembed;
using namespace varembed::annotate;
using nlohmann::json;

namespace {

using test::read_jsonl;

const std::map<std::string, JoinedVariant>& fixture_joined() {
  static const auto joined = [] {
    test::TempDir tmp;
    using K = ingest::SourceKind;
    for (auto [kind, name] : {std::pair{K::Favor, "favor"}, {K::ClinVar, "clinvar"}, {K::GwasCatalog, "gwas"}}) {
      pipeline::ingest_file(kind, pipeline::default_schema(kind),
                            test::fixture_path(std::string("join/") + name + ".tsv"), tmp / (std::string(name) + ".rec"));
    }
    pipeline::join_files(tmp / "favor.rec", tmp / "clinvar.rec", tmp / "gwas.rec", tmp / "joined.rec");
    std::map<std::string, JoinedVariant> m;
    for (auto& v : pipeline::read_joined(tmp / "joined.rec")) m.emplace(v.key.to_string(), std::move(v));
    return m;
  }();
  return joined;
}

}  // namespace

TEST(Template, FixtureGoldens) {
  const auto goldens = read_jsonl(test::fixture_path("annotate/goldens.jsonl"));
  ASSERT_EQ(goldens.size(), 30u);
  std::size_t verbose = 0;
  for (const auto& g : goldens) {
    const auto& key = g["key"].get<std::string>();
    auto it = fixture_joined().find(key);
    ASSERT_NE(it, fixture_joined().end()) << key;
    TemplateConfig cfg;
    cfg.omit_missing = g["omit_missing"].get<bool>();
    verbose += cfg.omit_missing ? 0 : 1;
    const auto a = render_annotation(it->second, cfg);
    EXPECT_EQ(a.text, g["text"].get<std::string>()) << key;
    EXPECT_EQ(a.key.rsid(), g["rsid"].is_null() ? std::nullopt : std::optional(g["rsid"].get<std::string>()));
  }
  EXPECT_EQ(verbose, 5u);
}

TEST(Template, IdentityStatementAndDeterminism) {
  Rng rng(2024);
  TemplateConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const auto v = test::random_joined_variant(rng);
    const auto a = render_annotation(v, cfg);
    const auto& k = v.key;
    const std::string head = "Variant " + k.to_string() + (k.rsid() ? " (" + *k.rsid() + ")" : "") + " is ";
    ASSERT_EQ(a.text.rfind(head, 0), 0u) << a.text;
    EXPECT_NE(a.text.find(" on chromosome " + std::string(k.chromosome().label()) + " at position " +
                          std::to_string(k.position()) + " (GRCh38) with reference allele " + k.ref() +
                          " and alternate allele " + k.alt() + "."),
              std::string::npos)
        << a.text;
    const auto again = render_annotation(v, cfg);
    ASSERT_EQ(a.text, again.text);
    EXPECT_EQ(a.key, k);
    EXPECT_EQ(a.token_count, 0u);
    EXPECT_EQ(a.text.find("  "), std::string::npos);
  }
}

TEST(Template, VariantTypeWording) {
  auto text = [](const char* ref, const char* alt) {
    JoinedVariant v{VariantKey::make("2", 10, ref, alt), {}, {}, {}, false};
    return render_annotation(v, {}).text;
  };
  EXPECT_NE(text("A", "G").find(" is a single nucleotide variant "), std::string::npos);
  EXPECT_NE(text("AC", "GT").find(" is a multi-nucleotide variant "), std::string::npos);
  EXPECT_NE(text("AC", "A").find(" is a deletion "), std::string::npos);
  EXPECT_NE(text("A", "AC").find(" is an insertion "), std::string::npos);
}

TEST(Template, CapsAndSectionOrder) {
  JoinedVariant v{VariantKey::make("3", 7, "A", "G"), {}, {}, {}, false};
  v.functional.cadd_phred = 20.04;
  ClinVarRecord c;
  c.clinical_significance = ClinicalSignificance::Benign;
  c.review_status = {2, "criteria provided, multiple submitters, no conflicts"};
  c.conditions = {"A", "B", "C", "D", "E", "F", "G"};
  v.clinvar.push_back(c);
  TemplateConfig cfg;
  auto text = render_annotation(v, cfg).text;
  EXPECT_NE(text.find("for A, B, C, D, E and 2 more (review status"), std::string::npos) << text;
  EXPECT_NE(text.find("The CADD Phred score is 20.0."), std::string::npos);
  cfg.max_conditions = 2;
  cfg.section_order = {Section::Identity, Section::Clinical, Section::Scores};
  text = render_annotation(v, cfg).text;
  EXPECT_NE(text.find("for A, B and 5 more"), std::string::npos) << text;
  EXPECT_LT(text.find("ClinVar"), text.find("CADD"));
  EXPECT_EQ(text.find("GENCODE"), std::string::npos);
}

TEST(Template, VerboseMissingPhrases) {
  JoinedVariant v{VariantKey::make("MT", 73, "A", "G"), {}, {}, {}, false};
  TemplateConfig cfg;
  cfg.omit_missing = false;
  const auto text = render_annotation(v, cfg).text;
  for (const char* phrase : {"The MetaSVM prediction is not available.", "The CADD Phred score is not available.",
                             "ClinVar clinical significance is not available.", "GWAS associations are not available."}) {
    EXPECT_NE(text.find(phrase), std::string::npos) << phrase;
  }
  cfg.omit_missing = true;
  EXPECT_EQ(render_annotation(v, cfg).text.find("not available"), std::string::npos);
}

TEST(Template, ConfigValidation) {
  EXPECT_NO_THROW(TemplateConfig::load(test::data_path("templates/default.json")).validate());
  auto bad = [](const char* text) { return TemplateConfig::from_json(json::parse(text)); };
  EXPECT_THROW(bad(R"({"section_order": ["gencode", "identity"]})"), ConfigError);
  EXPECT_THROW(bad(R"({"section_order": ["identity", "gwas", "gwas"]})"), ConfigError);
  EXPECT_THROW(bad(R"({"section_order": ["identity", "horoscope"]})"), ConfigError);
  EXPECT_THROW(bad(R"({"max_traits": 0})"), ConfigError);
  TemplateConfig cfg;
  cfg.max_traits = 3;
  cfg.section_order = {Section::Identity, Section::Gwas};
  const auto back = TemplateConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
}

TEST(Template, PValueFormatting) {
  EXPECT_EQ(format_p_value(3e-12), "3.0e-12");
  EXPECT_EQ(format_p_value(2.34e-8), "2.3e-08");
  EXPECT_EQ(format_p_value(1.0), "1.0e+00");
}

TEST(Tokenizer, WhitespaceCounts) {
  WhitespaceTokenizer ws;
  EXPECT_EQ(ws.count("a b  c\td\n"), 4u);
  EXPECT_EQ(ws.count("   x"), 1u);
  EXPECT_THROW(ws.count(""), PreconditionError);
}

TEST(Tokenizer, BpeMatchesReferenceEncoder) {
  auto bpe = BpeTokenizer::load(test::data_path("vocab/fixture.tiktoken"));
  const auto cases = read_jsonl(test::fixture_path("bpe/sentences.jsonl"));
  ASSERT_GE(cases.size(), 50u);
  for (const auto& c : cases) {
    const auto text = c["text"].get<std::string>();
    EXPECT_EQ(bpe.count(text), c["count"].get<std::uint32_t>()) << text;
    EXPECT_EQ(bpe.encode(text), c["tokens"].get<std::vector<std::uint32_t>>()) << text;
  }
}

TEST(Tokenizer, VocabErrors) {
  test::TempDir tmp;
  EXPECT_THROW(BpeTokenizer::load(tmp / "absent.tiktoken"), VocabLoadError);
  EXPECT_THROW(BpeTokenizer::parse("QQ== notanumber\n"), VocabLoadError);
  EXPECT_THROW(BpeTokenizer::parse("!!!! 3\n"), VocabLoadError);
  EXPECT_THROW(make_tokenizer("sentencepiece"), ConfigError);
  EXPECT_EQ(make_tokenizer("ws")->name(), "ws");
}

TEST(Tokenizer, Base64) {
  EXPECT_EQ(base64_decode("SGVsbG8="), "Hello");
  EXPECT_EQ(base64_decode("IA=="), " ");
}
