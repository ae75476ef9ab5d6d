#include <nlohmann/json.hpp>

#include "varembed/core/errors.hpp"
#include "varembed/core/serialize.hpp"
#include "varembed/join/external_sort.hpp"
#include "varembed/join/join.hpp"
#include "varembed/store/recfile.hpp"

namespace varembed::join {
namespace {

using nlohmann::json;

std::string be64(std::uint64_t v) {
  std::string out(8, '\0');
  for (int i = 7; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<char>(v & 0xff);
    v >>= 8;
  }
  return out;
}

std::string cbor(const json& j) {
  auto bytes = json::to_cbor(j);
  return std::string(bytes.begin(), bytes.end());
}

json uncbor(const std::string& s) { return json::from_cbor(s.begin(), s.end()); }

/// Walks query entries (sorted by key) against the unique sorted FAVOR run.
template <typename Hit, typename Miss>
void probe(SortedStream& favor, SortedStream& queries, Hit&& hit, Miss&& miss) {
  for (const SortEntry* q = queries.peek(); q; queries.advance(), q = queries.peek()) {
    const SortEntry* f = favor.peek();
    while (f && f->key < q->key) {
      favor.advance();
      f = favor.peek();
    }
    if (f && f->key == q->key) {
      hit(*q);
    } else {
      miss(*q);
    }
  }
}

}  // namespace

JoinReport join_sources_external(const std::filesystem::path& favor_records,
                                 const std::filesystem::path& clinvar_records,
                                 const std::filesystem::path& gwas_records, const JoinSink& sink,
                                 ExternalJoinOptions options) {
  ScratchDir scratch(options.tmp_dir);
  const auto budget = options.max_run_bytes;
  JoinReport report;

  // 1. FAVOR sorted by key; the sequence suffix makes the last record per key win.
  const auto favor_run = scratch.path() / "favor.run";
  {
    ExternalSorter sorter(scratch.path(), budget);
    store::RecordReader reader(favor_records, store::RecordKind::Favor);
    std::string payload;
    std::uint64_t seq = 0;
    while (reader.next_bytes(payload)) {
      auto rec = ingest::favor_from_json(uncbor(payload));
      sorter.add(rec.key.sort_bytes() + be64(seq++), payload);
    }
    auto stream = sorter.sorted();
    ExternalSorter rsids(scratch.path(), budget);
    RunWriter out(favor_run);
    std::string group;
    std::string last_payload;
    std::uint64_t group_size = 0;
    auto flush = [&] {
      if (group_size == 0) return;
      if (group_size > 1 && options.strict) {
        throw DuplicateKey(ingest::favor_from_json(uncbor(last_payload)).key.to_string());
      }
      report.favor_duplicates += group_size - 1;
      ++report.favor_records;
      out.add(group, last_payload);
      auto rec = ingest::favor_from_json(uncbor(last_payload));
      if (rec.key.rsid()) rsids.add(*rec.key.rsid(), group);
    };
    for (const SortEntry* e = stream->peek(); e; stream->advance(), e = stream->peek()) {
      std::string key = e->key.substr(0, e->key.size() - 8);
      if (group_size > 0 && key != group) {
        flush();
        group_size = 0;
      }
      group = std::move(key);
      last_payload = e->payload;
      ++group_size;
    }
    flush();
    out.close();

    RunWriter rs_out(scratch.path() / "rsid.run");
    auto rs_stream = rsids.sorted();
    for (const SortEntry* e = rs_stream->peek(); e; rs_stream->advance(), e = rs_stream->peek()) {
      rs_out.add(e->key, e->payload);
    }
    rs_out.close();
  }

  ExternalSorter attachments(scratch.path(), budget);
  auto attach = [&](const std::string& key, char tag, bool flipped, const json& record) {
    attachments.add(key + tag + (flipped ? '1' : '0'), cbor(record));
  };

  // 2. ClinVar: direct pass, then a flipped pass over the misses.
  {
    ExternalSorter direct(scratch.path(), budget);
    store::RecordReader reader(clinvar_records, store::RecordKind::ClinVar);
    std::string payload;
    while (reader.next_bytes(payload)) {
      ++report.clinvar.total;
      direct.add(ingest::clinvar_from_json(uncbor(payload)).key.sort_bytes(), payload);
    }
    ExternalSorter flipped(scratch.path(), budget);
    {
      auto favor = open_run(favor_run);
      auto queries = direct.sorted();
      probe(
          *favor, *queries,
          [&](const SortEntry& q) {
            ++report.clinvar.direct;
            attach(q.key, 'C', false, json(ingest::clinvar_from_json(uncbor(q.payload)).record));
          },
          [&](const SortEntry& q) {
            auto row = ingest::clinvar_from_json(uncbor(q.payload));
            flipped.add(row.key.flipped().sort_bytes(), q.payload);
          });
    }
    auto favor = open_run(favor_run);
    auto queries = flipped.sorted();
    probe(
        *favor, *queries,
        [&](const SortEntry& q) {
          ++report.clinvar.flipped;
          attach(q.key, 'C', true, json(ingest::clinvar_from_json(uncbor(q.payload)).record));
        },
        [&](const SortEntry&) { ++report.clinvar.unmatched; });
  }

  // 3. GWAS: positional rows as above; rsID-only rows against the rsID table.
  {
    ExternalSorter direct(scratch.path(), budget);
    ExternalSorter by_rsid(scratch.path(), budget);
    store::RecordReader reader(gwas_records, store::RecordKind::Gwas);
    std::string payload;
    while (reader.next_bytes(payload)) {
      ++report.gwas.total;
      auto row = ingest::gwas_from_json(uncbor(payload));
      if (row.key) {
        direct.add(row.key->sort_bytes(), payload);
      } else if (row.rsid) {
        by_rsid.add(*row.rsid, payload);
      } else {
        ++report.gwas.unmatched;
      }
    }
    ExternalSorter flipped(scratch.path(), budget);
    {
      auto favor = open_run(favor_run);
      auto queries = direct.sorted();
      probe(
          *favor, *queries,
          [&](const SortEntry& q) {
            ++report.gwas.direct;
            attach(q.key, 'G', false, json(ingest::gwas_from_json(uncbor(q.payload)).association));
          },
          [&](const SortEntry& q) {
            auto row = ingest::gwas_from_json(uncbor(q.payload));
            flipped.add(row.key->flipped().sort_bytes(), q.payload);
          });
    }
    {
      auto favor = open_run(favor_run);
      auto queries = flipped.sorted();
      probe(
          *favor, *queries,
          [&](const SortEntry& q) {
            ++report.gwas.flipped;
            attach(q.key, 'G', true, json(ingest::gwas_from_json(uncbor(q.payload)).association));
          },
          [&](const SortEntry&) { ++report.gwas.unmatched; });
    }
    auto table = open_run(scratch.path() / "rsid.run");
    auto queries = by_rsid.sorted();
    std::string cached_rsid;
    std::vector<std::string> cached_keys;
    bool cached = false;
    for (const SortEntry* q = queries->peek(); q; queries->advance(), q = queries->peek()) {
      if (!cached || q->key != cached_rsid) {
        cached_rsid = q->key;
        cached_keys.clear();
        cached = true;
        const SortEntry* t = table->peek();
        while (t && t->key < q->key) {
          table->advance();
          t = table->peek();
        }
        while (t && t->key == q->key) {
          cached_keys.push_back(t->payload);
          table->advance();
          t = table->peek();
        }
      }
      if (cached_keys.empty()) {
        ++report.gwas.unmatched;
        continue;
      }
      ++report.gwas.via_rsid;
      auto assoc = json(ingest::gwas_from_json(uncbor(q->payload)).association);
      for (const auto& key : cached_keys) attach(key, 'G', false, assoc);
    }
  }

  // 4. Merge attachments onto FAVOR in canonical order.
  auto favor = open_run(favor_run);
  auto atts = attachments.sorted();
  for (const SortEntry* f = favor->peek(); f; favor->advance(), f = favor->peek()) {
    auto rec = ingest::favor_from_json(uncbor(f->payload));
    JoinedVariant v{rec.key, rec.functional, {}, {}, false};
    const SortEntry* a = atts->peek();
    while (a && a->key.size() == f->key.size() + 2 && a->key.compare(0, f->key.size(), f->key) == 0) {
      auto record = uncbor(a->payload);
      if (a->key[f->key.size()] == 'C') {
        v.clinvar.push_back(record.get<ClinVarRecord>());
      } else {
        v.gwas.push_back(record.get<GwasAssociation>());
      }
      if (a->key.back() == '1') v.flip_applied = true;
      atts->advance();
      a = atts->peek();
    }
    report.gwas_duplicates_collapsed += canonicalize_attachments(v);
    ++report.joined;
    sink(std::move(v));
  }
  return report;
}

}  // namespace varembed::join
