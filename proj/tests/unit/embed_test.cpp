#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>

#include "support/embed_server.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "varembed/core/errors.hpp"
#include "varembed/core/rng.hpp"
#include "varembed/embed/backend.hpp"
#include "varembed/embed/batch.hpp"
#include "varembed/embed/cost.hpp"
#include "varembed/embed/journal.hpp"
#include "varembed/embed/remote.hpp"
#include "varembed/embed/runner.hpp"
#include "varembed/embed/subprocess.hpp"
#include "varembed/store/store.hpp"

using namespace varembed;
using namespace varembed::embed;
using Fault = test::SimEmbedServer::Fault;

namespace {

std::vector<AnnotationText> make_annotations(std::size_t n, std::uint64_t seed = 3) {
  Rng rng(seed);
  std::vector<AnnotationText> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto key = VariantKey::make("4", static_cast<std::uint32_t>(1000 + i * 3), "A", i % 2 ? "G" : "T");
    AnnotationText a{key, "Variant " + key.to_string() + " is a single nucleotide variant. Note " +
                              std::to_string(rng.uniform(1000000)) + ".",
                     static_cast<std::uint32_t>(5 + rng.uniform(60))};
    out.push_back(a);
  }
  return out;
}

using test::store_bytes;

RemoteConfig remote_for(const test::SimEmbedServer& server) {
  RemoteConfig c;
  c.endpoint = server.endpoint();
  c.model_id = "sim-model";
  c.dim = 16;
  c.backoff_base_ms = 10;
  return c;
}

/// Delegates to an inner backend and fails once `fail_at` batches succeeded.
class FlakyBackend final : public Backend {
 public:
  FlakyBackend(Backend& inner, std::size_t fail_at) : inner_(inner), fail_at_(fail_at) {}
  std::vector<EmbeddingVector> embed(const std::vector<EmbedItem>& batch) override {
    if (calls_++ >= fail_at_) throw BackendUnavailable("injected");
    return inner_.embed(batch);
  }
  std::size_t dim() const override { return inner_.dim(); }
  std::string model_id() const override { return inner_.model_id(); }
  bool concurrent() const override { return false; }

 private:
  Backend& inner_;
  std::size_t fail_at_;
  std::size_t calls_ = 0;
};

}  // namespace

TEST(BatchPlan, GreedyPackingProperties) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto ann = make_annotations(500, seed);
    Rng rng(seed);
    if (seed % 5 == 0) ann[rng.uniform(500)].token_count = 5000;  // oversize item
    const BatchLimits limits{1 + rng.uniform(40), 100 + rng.uniform(900)};
    const auto plan = plan_batches(ann, limits);
    std::size_t expect_begin = 0;
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
      const auto& batch = plan.batches[b];
      ASSERT_EQ(batch.begin, expect_begin);
      ASSERT_GT(batch.size(), 0u);
      std::uint64_t tokens = 0;
      for (std::size_t i = batch.begin; i < batch.end; ++i) tokens += ann[i].token_count;
      EXPECT_EQ(tokens, batch.tokens);
      EXPECT_LE(batch.size(), limits.max_items);
      if (batch.oversize) {
        EXPECT_EQ(batch.size(), 1u);
        EXPECT_GT(tokens, limits.max_tokens);
      } else {
        EXPECT_LE(tokens, limits.max_tokens);
      }
      if (batch.end < ann.size()) {  // greedy: the next item would not have fit
        EXPECT_TRUE(batch.size() == limits.max_items || tokens + ann[batch.end].token_count > limits.max_tokens);
      }
      expect_begin = batch.end;
    }
    EXPECT_EQ(expect_begin, ann.size());
  }
  EXPECT_THROW(plan_batches(make_annotations(3), {0, 10}), PreconditionError);
}

TEST(MockBackend, DeterministicUnitVectors) {
  MockBackend a(7, 32), b(7, 32), c(8, 32);
  const auto va = a.vector_for("hello"), vb = b.vector_for("hello");
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, c.vector_for("hello"));
  EXPECT_NE(va, a.vector_for("hello!"));
  double norm = 0;
  for (float x : va) norm += double(x) * x;
  EXPECT_NEAR(norm, 1.0, 1e-5);
  EXPECT_EQ(a.model_id(), "mock:seed=7,dim=32");
}

TEST(InformativeMock, IdentityLayout) {
  InformativeMockBackend be(96, 1);
  const auto v = be.vector_for("Variant X-155270000-C-T (rs1) is a single nucleotide variant on chromosome X.");
  ASSERT_EQ(v.size(), 96u);
  const int xrank = Chromosome::from_label("X").rank();
  for (int i = 0; i < 25; ++i) EXPECT_EQ(v[i], i == xrank ? 1.0f : 0.0f) << i;
  for (int i = 25; i < 29; ++i) EXPECT_EQ(v[i], i == 26 ? 1.0f : 0.0f) << i;  // C
  EXPECT_NEAR(v[29], 155270000 / 250e6, 1e-6);
  for (int i = 30; i < 64; ++i) EXPECT_EQ(v[i], 0.0f);
  for (int i = 64; i < 96; ++i) EXPECT_LT(std::abs(v[i]), 0.1f + 1e-6f);
  EXPECT_THROW(InformativeMockBackend(32), ConfigError);
  auto key = identity_from_text("Variant 10-5-GA-G is a deletion");
  ASSERT_TRUE(key);
  EXPECT_EQ(key->to_string(), "10-5-GA-G");
  EXPECT_FALSE(identity_from_text("No identity here"));
}

TEST(BackendSpec, Parsing) {
  EXPECT_EQ(make_backend("mock:seed=7,dim=16")->dim(), 16u);
  EXPECT_EQ(make_backend("informative:dim=128")->model_id(), "informative:dim=128,seed=0");
  EXPECT_THROW(make_backend("quantum:dim=3"), ConfigError);
  EXPECT_THROW(make_backend("mock:dim=0"), ConfigError);
  EXPECT_THROW(make_backend("remote:/nonexistent.json"), ConfigError);
}

TEST(Journal, RecoversAndTruncatesTornTail) {
  test::TempDir tmp;
  const auto path = tmp / "j";
  {
    Journal j(path, 42, 2);
    EXPECT_TRUE(j.recovered().empty());
    j.append(0, {1, 2, 3, 4});
    j.append(1, {5, 6});
  }
  const auto full = std::filesystem::file_size(path);
  {
    Journal j(path, 42, 2);
    ASSERT_EQ(j.recovered().size(), 2u);
    EXPECT_EQ(j.recovered()[1].values, (std::vector<float>{5, 6}));
    EXPECT_EQ(j.truncated_bytes(), 0u);
  }
  std::filesystem::resize_file(path, full - 3);
  {
    Journal j(path, 42, 2);
    ASSERT_EQ(j.recovered().size(), 1u);
    EXPECT_GT(j.truncated_bytes(), 0u);
    j.append(1, {7, 8});
  }
  Journal j(path, 42, 2);
  ASSERT_EQ(j.recovered().size(), 2u);
  EXPECT_EQ(j.recovered()[1].values, (std::vector<float>{7, 8}));
  EXPECT_THROW(Journal(path, 43, 2), ConfigError);
  EXPECT_THROW(Journal(path, 42, 3), ConfigError);
}

TEST(Runner, InflightDoesNotChangeStore) {
  test::TempDir tmp;
  const auto ann = make_annotations(400);
  MockBackend be(1, 8);
  EmbedOptions opts;
  opts.limits = {16, 400};
  opts.inflight = 1;
  embed_to_store(ann, be, tmp / "a", opts);
  opts.inflight = 6;
  const auto r = embed_to_store(ann, be, tmp / "b", opts);
  EXPECT_EQ(store_bytes(tmp / "a"), store_bytes(tmp / "b"));
  EXPECT_EQ(r.records, ann.size());
  auto s = store::EmbeddingStore::open(tmp / "b");
  EXPECT_EQ(*s.get(ann[123].key.to_string()), be.vector_for(ann[123].text));
}

TEST(Runner, ResumeAfterFailureIsBitIdentical) {
  test::TempDir tmp;
  const auto ann = make_annotations(300);
  MockBackend be(2, 8);
  EmbedOptions opts;
  opts.limits = {10, 100000};
  embed_to_store(ann, be, tmp / "ref", opts);

  opts.journal = tmp / "embed.journal";
  opts.inflight = 1;  // exactly the first 13 batches succeed
  FlakyBackend flaky(be, 13);
  EXPECT_THROW(embed_to_store(ann, flaky, tmp / "out", opts), BackendUnavailable);
  EXPECT_THROW(store::EmbeddingStore::open(tmp / "out"), FormatError);
  const auto r = embed_to_store(ann, be, tmp / "out", opts);
  EXPECT_EQ(r.resumed_batches, 13u);
  EXPECT_EQ(store_bytes(tmp / "out"), store_bytes(tmp / "ref"));
}

TEST(Runner, RejectsUnsortedAnnotations) {
  test::TempDir tmp;
  auto ann = make_annotations(5);
  std::swap(ann[1], ann[3]);
  MockBackend be(1, 4);
  EXPECT_THROW(embed_to_store(ann, be, tmp / "s", {}), UnsortedInput);
}

TEST(Remote, VectorsMatchServedModel) {
  test::SimEmbedServer server;
  RemoteBackend be(remote_for(server));
  std::vector<EmbedItem> items = {{"k1", "first text"}, {"k2", "second text"}};
  const auto out = be.embed(items);
  ASSERT_EQ(out.size(), 2u);
  MockBackend ref(99, 16);
  EXPECT_EQ(out[0].values, ref.vector_for("first text"));
  EXPECT_EQ(out[1].values, ref.vector_for("second text"));
  EXPECT_EQ(out[0].model_id, "sim-model");
}

TEST(Remote, RetriesTransientStatusesWithBackoff) {
  test::SimEmbedServer server;
  auto cfg = remote_for(server);
  cfg.backoff_base_ms = 100;
  cfg.jitter_seed = 5;
  RemoteBackend be(cfg);
  std::vector<std::chrono::milliseconds> slept;
  be.set_sleeper([&](std::chrono::milliseconds d) { slept.push_back(d); });
  server.push_faults({Fault::Status429, Fault::Status500, Fault::Status503});
  std::vector<EmbedItem> items = {{"k", "t"}};
  EXPECT_EQ(be.embed(items).size(), 1u);
  const auto attempts = be.attempts();
  ASSERT_EQ(attempts.size(), 4u);
  EXPECT_EQ(attempts[0].status, 429);
  EXPECT_EQ(attempts[1].status, 500);
  EXPECT_EQ(attempts[2].status, 503);
  EXPECT_EQ(attempts[3].status, 200);
  ASSERT_EQ(slept.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    const long lo = 100L << k;
    EXPECT_GE(slept[k].count(), lo);
    EXPECT_LE(slept[k].count(), lo + lo / 2);
    EXPECT_EQ(attempts[k + 1].delay_before, slept[k]);
  }
}

TEST(Remote, BackoffScheduleBounds) {
  for (int retry = 0; retry < 6; ++retry) {
    for (std::uint64_t draw : {0ull, 1ull, 0xffffffffffffffffull, 0x123456789abcdefull}) {
      const auto d = backoff_delay(500, retry, draw).count();
      EXPECT_GE(d, 500L << retry);
      EXPECT_LE(d, (500L << retry) * 3 / 2);
    }
  }
}

TEST(Remote, ExhaustedRetriesAndClientErrors) {
  test::SimEmbedServer server;
  auto cfg = remote_for(server);
  cfg.max_retries = 2;
  RemoteBackend be(cfg);
  be.set_sleeper([](auto) {});
  std::vector<EmbedItem> items = {{"k", "t"}};
  server.push_faults({Fault::Status503, Fault::Status503, Fault::Status503});
  EXPECT_THROW(be.embed(items), BackendUnavailable);
  EXPECT_EQ(be.attempts().size(), 3u);
  server.push_faults({Fault::Status400});
  EXPECT_THROW(be.embed(items), BackendUnavailable);
  EXPECT_EQ(be.attempts().size(), 4u);  // 400 is not retried
}

TEST(Remote, MalformedResponses) {
  test::SimEmbedServer server;
  RemoteBackend be(remote_for(server));
  std::vector<EmbedItem> items = {{"a", "x"}, {"b", "y"}};
  server.push_faults({Fault::WrongDim});
  EXPECT_THROW(be.embed(items), DimMismatch);
  server.push_faults({Fault::MissingItem});
  EXPECT_THROW(be.embed(items), PartialBatch);
  server.push_faults({Fault::BadJson});
  EXPECT_THROW(be.embed(items), PartialBatch);
  server.push_faults({Fault::DuplicateIndex});
  EXPECT_THROW(be.embed(items), PartialBatch);
  EXPECT_EQ(be.embed(items).size(), 2u);
}

TEST(Remote, BearerTokenFromEnvironment) {
  test::SimEmbedServer server({16, 99, "sekrit"});
  auto cfg = remote_for(server);
  cfg.auth_env_var = "VAREMBED_TEST_TOKEN";
  unsetenv("VAREMBED_TEST_TOKEN");
  EXPECT_THROW(RemoteBackend{cfg}, ConfigError);
  setenv("VAREMBED_TEST_TOKEN", "wrong", 1);
  {
    RemoteBackend be(cfg);
    std::vector<EmbedItem> items = {{"a", "x"}};
    EXPECT_THROW(be.embed(items), BackendUnavailable);
  }
  setenv("VAREMBED_TEST_TOKEN", "sekrit", 1);
  RemoteBackend be(cfg);
  std::vector<EmbedItem> items = {{"a", "x"}};
  EXPECT_EQ(be.embed(items).size(), 1u);
  unsetenv("VAREMBED_TEST_TOKEN");
}

TEST(Remote, ConfigRejectsCredentialsAndMissingDim) {
  using nlohmann::json;
  json base = {{"endpoint", "http://127.0.0.1:1/v1/embeddings"}, {"model_id", "m"}, {"dim", 8}};
  EXPECT_NO_THROW(RemoteConfig::from_json(base));
  auto with_key = base;
  with_key["api_key"] = "abc";
  EXPECT_THROW(RemoteConfig::from_json(with_key), ConfigError);
  auto no_dim = base;
  no_dim.erase("dim");
  EXPECT_THROW(RemoteConfig::from_json(no_dim), ConfigError);
}

TEST(Remote, RateLimitHoldsAtServer) {
  test::SimEmbedServer server;
  auto cfg = remote_for(server);
  cfg.rate_limit_rps = 5;
  RemoteBackend be(cfg);
  const auto ann = make_annotations(20);
  test::TempDir tmp;
  EmbedOptions opts;
  opts.limits = {1, 100000};
  opts.inflight = 4;
  embed_to_store(ann, be, tmp / "s", opts);
  EXPECT_EQ(server.requests(), 20u);
  EXPECT_LE(server.max_in_window(std::chrono::seconds(1)), 5u);
}

TEST(Remote, KillAndResumeMatchesUninterruptedRun) {
  test::SimEmbedServer server;
  const auto ann = make_annotations(120);
  test::TempDir tmp;
  EmbedOptions opts;
  opts.limits = {8, 100000};
  opts.inflight = 3;
  {
    RemoteBackend be(remote_for(server));
    embed_to_store(ann, be, tmp / "ref", opts);
  }
  opts.journal = tmp / "j";
  server.fail_after(6, Fault::Status400);
  {
    RemoteBackend be(remote_for(server));
    EXPECT_THROW(embed_to_store(ann, be, tmp / "out", opts), BackendUnavailable);
  }
  server.clear_faults();
  RemoteBackend be(remote_for(server));
  const auto r = embed_to_store(ann, be, tmp / "out", opts);
  EXPECT_GE(r.resumed_batches, 1u);
  EXPECT_LE(r.resumed_batches, 6u);
  EXPECT_EQ(store_bytes(tmp / "out"), store_bytes(tmp / "ref"));
}

TEST(Subprocess, AdapterMatchesReferenceScript) {
  SubprocessConfig cfg;
  cfg.command = {"python3", test::tools_path("mock_embed_adapter.py").string(), "--dim", "6"};
  cfg.dim = 6;
  SubprocessBackend be(cfg);
  std::vector<EmbedItem> items = {{"a", "alpha text"}, {"b", "beta \"quoted\" text"}};
  const auto out = be.embed(items);
  ASSERT_EQ(out.size(), 2u);
  const std::string cmd = "python3 -c \"import sys; sys.path.insert(0, '" + test::tools_path("").string() +
                          "'); import mock_embed_adapter as m; print(' '.join(repr(x) for x in m.embed('alpha text', 6)))\"";
  FILE* p = popen(cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  for (std::size_t d = 0; d < 6; ++d) {
    double x = 0;
    ASSERT_EQ(std::fscanf(p, "%lf", &x), 1);
    EXPECT_EQ(out[0].values[d], static_cast<float>(x));
  }
  pclose(p);
  EXPECT_NE(out[0].values, out[1].values);
  EXPECT_EQ(be.embed(items)[1].values, out[1].values);
}

TEST(Cost, ExactArithmetic) {
  EXPECT_EQ(estimate_cost(133'500'000).usd(), "8.677500000000");
  EXPECT_EQ(estimate_cost(1).usd(), "0.000000065000");
  EXPECT_EQ(estimate_cost(0).usd(), "0.000000000000");
  const auto p = UnitPrice::parse_usd_per_million("0.13");
  EXPECT_EQ(p.micro_usd_per_million, 130000u);
  EXPECT_EQ(p.usd_per_million(), "0.130000");
  EXPECT_THROW(UnitPrice::parse_usd_per_million("cheap"), ConfigError);
  EXPECT_THROW(UnitPrice::parse_usd_per_million("0.0000001"), ConfigError);
  for (std::uint64_t t : {1ull, 7ull, 123456789ull, 987654321012ull}) {
    EXPECT_EQ(estimate_cost(60 * t).pico_usd, 60 * estimate_cost(t).pico_usd);
  }
}
