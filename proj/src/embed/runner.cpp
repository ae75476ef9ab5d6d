#include "varembed/embed/runner.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include "varembed/core/errors.hpp"
#include "varembed/core/hash.hpp"
#include "varembed/core/log.hpp"
#include "varembed/embed/journal.hpp"

namespace varembed::embed {

std::uint64_t plan_fingerprint(const std::vector<AnnotationText>& annotations, const BatchPlan& plan,
                               const Backend& backend) {
  Xxh64Stream h(0x6a6f75726e616cULL);
  auto add = [&](std::string_view s) {
    const auto n = static_cast<std::uint64_t>(s.size());
    h.update(&n, sizeof n);
    h.update(s.data(), s.size());
  };
  add(backend.model_id());
  const std::uint64_t limits[3] = {plan.limits.max_items, plan.limits.max_tokens, backend.dim()};
  h.update(limits, sizeof limits);
  for (const auto& a : annotations) {
    add(a.key.to_string());
    add(a.text);
  }
  return h.digest();
}

EmbedReport embed_to_store(const std::vector<AnnotationText>& annotations, Backend& backend,
                           const std::filesystem::path& store_dir, const EmbedOptions& options) {
  for (std::size_t i = 1; i < annotations.size(); ++i) {
    if (!(annotations[i - 1].key < annotations[i].key)) {
      throw UnsortedInput("annotations must be in canonical key order without duplicates: " +
                          annotations[i].key.to_string() + " after " + annotations[i - 1].key.to_string());
    }
  }
  const auto plan = plan_batches(annotations, options.limits);
  const std::size_t dim = backend.dim();
  const std::string model = backend.model_id();
  const std::size_t n = plan.batches.size();

  EmbedReport report;
  report.batches = n;
  for (const auto& b : plan.batches) {
    report.tokens += b.tokens;
    if (b.oversize) ++report.oversize_batches;
  }

  std::optional<Journal> journal;
  if (options.journal) {
    journal.emplace(*options.journal, plan_fingerprint(annotations, plan, backend),
                    static_cast<std::uint32_t>(dim));
    if (journal->truncated_bytes() > 0) {
      log::warn("journal_truncated", {{"bytes", journal->truncated_bytes()}});
    }
  }

  store::StoreWriter writer(store_dir, dim, model, options.write);
  auto commit = [&](std::size_t bi, const float* values) {
    const auto& b = plan.batches[bi];
    for (std::size_t i = b.begin; i < b.end; ++i) {
      writer.add(annotations[i].key.to_string(),
                 std::span<const float>(values + (i - b.begin) * dim, dim));
    }
  };

  std::size_t committed = 0;
  if (journal) {
    for (const auto& e : journal->recovered()) {
      if (e.batch >= n || e.values.size() != plan.batches[e.batch].size() * dim) {
        throw ConfigError("journal entry does not fit the batch plan");
      }
      commit(e.batch, e.values.data());
      ++committed;
    }
    report.resumed_batches = committed;
    if (committed > 0) log::info("embed_resume", {{"batches", committed}, {"of", n}});
  }

  const std::size_t workers =
      std::max<std::size_t>(1, std::min(backend.concurrent() ? options.inflight : 1, n - committed));
  const std::size_t window = 2 * workers;
  std::mutex mutex;
  std::condition_variable cv;
  std::map<std::size_t, std::vector<float>> done;
  std::size_t next = committed;
  std::size_t commit_mark = committed;
  std::exception_ptr failure;
  bool stop = false;

  auto work = [&] {
    for (;;) {
      std::size_t bi;
      {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return stop || next >= n || next < commit_mark + window; });
        if (stop || next >= n) return;
        bi = next++;
      }
      try {
        const auto& b = plan.batches[bi];
        std::vector<EmbedItem> items;
        std::vector<std::string> keys;
        keys.reserve(b.size());
        for (std::size_t i = b.begin; i < b.end; ++i) keys.push_back(annotations[i].key.to_string());
        for (std::size_t i = b.begin; i < b.end; ++i) items.push_back({keys[i - b.begin], annotations[i].text});
        auto vectors = backend.embed(items);
        if (vectors.size() != b.size()) {
          throw PartialBatch("backend returned " + std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(b.size()) + " items");
        }
        std::vector<float> flat;
        flat.reserve(b.size() * dim);
        for (const auto& v : vectors) {
          v.validate(dim);
          if (v.model_id != model) throw DimMismatch("backend changed model id mid-run");
          flat.insert(flat.end(), v.values.begin(), v.values.end());
        }
        std::lock_guard lock(mutex);
        done.emplace(bi, std::move(flat));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  if (committed < n) {
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  try {
    while (committed < n) {
      std::vector<float> flat;
      {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return failure || done.count(committed); });
        // Batches already finished in order are still journaled after a failure.
        if (!done.count(committed)) break;
        flat = std::move(done[committed]);
        done.erase(committed);
      }
      if (journal) journal->append(static_cast<std::uint32_t>(committed), flat);
      commit(committed, flat.data());
      ++committed;
      {
        std::lock_guard lock(mutex);
        commit_mark = committed;
      }
      cv.notify_all();
      if (options.progress) options.progress(committed, n);
    }
  } catch (...) {
    std::lock_guard lock(mutex);
    if (!failure) failure = std::current_exception();
    stop = true;
  }
  {
    std::lock_guard lock(mutex);
    stop = true;
  }
  cv.notify_all();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  report.manifest = writer.finish();
  report.records = report.manifest.record_count;
  return report;
}

}  // namespace varembed::embed
