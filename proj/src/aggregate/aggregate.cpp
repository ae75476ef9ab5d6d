#include "varembed/aggregate/aggregate.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "varembed/core/errors.hpp"
#include "varembed/core/line_source.hpp"
#include "varembed/core/parallel.hpp"

namespace varembed::aggregate {
namespace {

constexpr char kMagic[8] = {'V', 'E', 'D', 'O', 'S', 'E', '0', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  char b[4];
  in.read(b, 4);
  if (in.gcount() != 4) throw FormatError("truncated dosage file (" + what + ")");
  std::uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    auto tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) return out;
    pos = tab + 1;
  }
}

}  // namespace

void DosageMatrix::validate() const {
  if (dosages.size() != samples() * variants()) {
    throw FormatError("dosage matrix shape " + std::to_string(dosages.size()) + " != " +
                      std::to_string(samples()) + " x " + std::to_string(variants()));
  }
  for (auto d : dosages) {
    if (d > 2 && d != kMissing) throw FormatError("dosage value " + std::to_string(d) + " not in {0,1,2}");
  }
}

void write_dosage_binary(const std::filesystem::path& path, const DosageMatrix& m) {
  m.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(kMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(m.samples()));
  put_u32(out, static_cast<std::uint32_t>(m.variants()));
  for (const auto& id : m.sample_ids) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  out.write(reinterpret_cast<const char*>(m.dosages.data()), static_cast<std::streamsize>(m.dosages.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

DosageMatrix read_dosage_binary(const std::filesystem::path& path, std::vector<VariantKey> keys) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError(path.string() + " is not a binary dosage matrix");
  }
  DosageMatrix m;
  const auto n_samples = get_u32(in, "header");
  const auto n_variants = get_u32(in, "header");
  if (n_variants != keys.size()) {
    throw FormatError("dosage file has " + std::to_string(n_variants) + " variants but key list has " +
                      std::to_string(keys.size()));
  }
  for (std::uint32_t i = 0; i < n_samples; ++i) {
    std::string id(get_u32(in, "sample id"), '\0');
    in.read(id.data(), static_cast<std::streamsize>(id.size()));
    if (static_cast<std::size_t>(in.gcount()) != id.size()) throw FormatError("truncated dosage file (sample id)");
    m.sample_ids.push_back(std::move(id));
  }
  m.variant_keys = std::move(keys);
  m.dosages.resize(static_cast<std::size_t>(n_samples) * n_variants);
  in.read(reinterpret_cast<char*>(m.dosages.data()), static_cast<std::streamsize>(m.dosages.size()));
  if (static_cast<std::size_t>(in.gcount()) != m.dosages.size()) throw FormatError("truncated dosage file (matrix)");
  m.validate();
  return m;
}

void write_dosage_tsv(const std::filesystem::path& path, const DosageMatrix& m) {
  m.validate();
  std::ofstream out(path, std::ios::trunc);
  out << "sample_id";
  for (const auto& k : m.variant_keys) out << '\t' << k.to_string();
  out << '\n';
  for (std::size_t s = 0; s < m.samples(); ++s) {
    out << m.sample_ids[s];
    for (std::size_t v = 0; v < m.variants(); ++v) {
      const auto d = m.at(s, v);
      out << '\t';
      if (d == kMissing) {
        out << "NA";
      } else {
        out << static_cast<int>(d);
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("cannot write " + path.string());
}

DosageMatrix read_dosage_tsv(const std::filesystem::path& path) {
  FileLineSource src(path);
  std::string line;
  if (!src.next_line(line)) throw FormatError(path.string() + ": empty dosage TSV");
  DosageMatrix m;
  auto header = split_tabs(line);
  for (std::size_t i = 1; i < header.size(); ++i) m.variant_keys.push_back(VariantKey::parse(header[i]));
  std::size_t line_no = 1;
  while (src.next_line(line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (cells.size() != header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    }
    m.sample_ids.emplace_back(cells[0]);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const auto c = cells[i];
      if (c == "NA" || c == "." || c.empty()) {
        m.dosages.push_back(kMissing);
      } else if (c.size() == 1 && c[0] >= '0' && c[0] <= '2') {
        m.dosages.push_back(static_cast<std::uint8_t>(c[0] - '0'));
      } else {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad dosage '" + std::string(c) + "'");
      }
    }
  }
  m.validate();
  return m;
}

std::vector<VariantKey> read_key_list(const std::filesystem::path& path) {
  FileLineSource src(path);
  std::vector<VariantKey> keys;
  std::string line;
  while (src.next_line(line)) {
    if (line.empty() || line[0] == '#') continue;
    keys.push_back(VariantKey::parse(line));
  }
  return keys;
}

DosageMatrix load_dosages(const std::filesystem::path& path,
                          const std::optional<std::filesystem::path>& keys_path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  char magic[8] = {};
  probe.read(magic, 8);
  if (probe.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0) {
    if (!keys_path) throw ConfigError("binary dosage input needs --keys");
    return read_dosage_binary(path, read_key_list(*keys_path));
  }
  auto m = read_dosage_tsv(path);
  if (keys_path && read_key_list(*keys_path) != m.variant_keys) {
    throw ConfigError("--keys does not match the dosage TSV header");
  }
  return m;
}

MissingPolicy parse_missing_policy(std::string_view text) {
  if (text == "skip") return MissingPolicy::Skip;
  if (text == "zero") return MissingPolicy::Zero;
  throw ConfigError("unknown missing policy '" + std::string(text) + "' (skip|zero)");
}

std::vector<ResolvedVariant> resolve_keys(const std::vector<VariantKey>& keys,
                                          const store::EmbeddingStore& store) {
  std::vector<ResolvedVariant> out;
  out.reserve(keys.size());
  for (const auto& k : keys) {
    auto m = join::match_with_flip(k, [&](const VariantKey& q) { return store.contains(q.to_string()); });
    if (m.kind == join::MatchKind::None) throw KeyNotInStore(k.to_string());
    out.push_back({m.key->to_string(), m.kind == join::MatchKind::Flipped});
  }
  return out;
}

double effective_dosage(std::uint8_t raw, bool flipped, MissingPolicy policy) {
  double d;
  if (raw == kMissing) {
    if (policy == MissingPolicy::Skip) return -1.0;
    d = 0.0;
  } else {
    d = raw;
  }
  return flipped ? 2.0 - d : d;
}

std::vector<double> weighted_combination(std::span<const double> weights,
                                         const std::vector<std::vector<float>>& embeddings,
                                         Weighting weighting) {
  if (weights.size() != embeddings.size() || embeddings.empty()) {
    throw PreconditionError("weights and embeddings must align and be non-empty");
  }
  const std::size_t dim = embeddings.front().size();
  std::vector<double> acc(dim, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (w < 0) throw PreconditionError("negative weight");
    if (embeddings[i].size() != dim) throw DimMismatch("embedding widths differ");
    if (w == 0.0) continue;
    total += w;
    for (std::size_t d = 0; d < dim; ++d) acc[d] += w * embeddings[i][d];
  }
  if (weighting == Weighting::Mean) {
    if (total == 0.0) throw AllZeroDosage("total dosage weight is zero");
    for (auto& a : acc) a /= total;
  }
  return acc;
}

EmbeddingVector individual_embedding(std::span<const std::uint8_t> dosage_row,
                                     const store::EmbeddingStore& store,
                                     const std::vector<VariantKey>& keys,
                                     const AggregateOptions& options) {
  if (dosage_row.size() != keys.size()) throw PreconditionError("dosage row and key list differ in length");
  const auto resolved = resolve_keys(keys, store);
  std::vector<double> weights;
  std::vector<std::vector<float>> embeddings;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double w = effective_dosage(dosage_row[i], resolved[i].flipped, options.policy);
    if (w <= 0.0) continue;
    weights.push_back(w);
    embeddings.push_back(*store.get(resolved[i].store_key));
  }
  if (weights.empty()) {
    if (options.weighting == Weighting::Mean) throw AllZeroDosage("sample has no positive dosage");
    return EmbeddingVector{std::vector<float>(store.dim(), 0.0f), store.manifest().model_id};
  }
  const auto combined = weighted_combination(weights, embeddings, options.weighting);
  EmbeddingVector out;
  out.model_id = store.manifest().model_id;
  out.values.assign(combined.begin(), combined.end());
  return out;
}

std::string_view to_string(SampleStatus s) noexcept {
  return s == SampleStatus::AllZeroDosage ? "AllZeroDosage" : "ok";
}

std::size_t CohortResult::all_zero_count() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), SampleStatus::AllZeroDosage));
}

CohortResult aggregate_cohort(const DosageMatrix& matrix, const store::EmbeddingStore& store,
                              const AggregateOptions& options) {
  matrix.validate();
  if (options.chunk_variants == 0) throw PreconditionError("chunk size must be >= 1");
  const auto resolved = resolve_keys(matrix.variant_keys, store);
  const std::size_t n = matrix.samples();
  const std::size_t v = matrix.variants();
  const std::size_t dim = store.dim();

  CohortResult result;
  result.sample_ids = matrix.sample_ids;
  result.dim = dim;
  result.embeddings.assign(n * dim, 0.0);
  result.status.assign(n, SampleStatus::Ok);
  for (const auto& r : resolved) result.flipped_variants += r.flipped ? 1 : 0;
  std::vector<double> totals(n, 0.0);

  std::vector<double> chunk;
  for (std::size_t c0 = 0; c0 < v; c0 += options.chunk_variants) {
    const std::size_t c1 = std::min(v, c0 + options.chunk_variants);
    chunk.assign((c1 - c0) * dim, 0.0);
    for (std::size_t j = c0; j < c1; ++j) {
      const auto e = store.get(resolved[j].store_key);
      std::copy(e->begin(), e->end(), chunk.begin() + static_cast<std::ptrdiff_t>((j - c0) * dim));
    }
    parallel_blocks(n, options.threads, [&](std::size_t s0, std::size_t s1) {
      for (std::size_t s = s0; s < s1; ++s) {
        double* acc = result.embeddings.data() + s * dim;
        for (std::size_t j = c0; j < c1; ++j) {
          const double w = effective_dosage(matrix.at(s, j), resolved[j].flipped, options.policy);
          if (w <= 0.0) continue;
          totals[s] += w;
          const double* e = chunk.data() + (j - c0) * dim;
          for (std::size_t d = 0; d < dim; ++d) acc[d] += w * e[d];
        }
      }
    });
  }
  for (std::size_t s = 0; s < n; ++s) {
    double* acc = result.embeddings.data() + s * dim;
    if (totals[s] == 0.0) {
      if (options.weighting == Weighting::Mean) result.status[s] = SampleStatus::AllZeroDosage;
      std::fill(acc, acc + dim, 0.0);
      continue;
    }
    if (options.weighting == Weighting::Mean) {
      for (std::size_t d = 0; d < dim; ++d) acc[d] /= totals[s];
    }
  }
  return result;
}

store::Manifest write_cohort_store(const CohortResult& result, const std::filesystem::path& dir,
                                   const std::string& model_id, bool drop_all_zero,
                                   store::WriteOptions options) {
  options.key_kind = store::KeyKind::Sample;
  std::vector<std::size_t> order(result.sample_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return result.sample_ids[a] < result.sample_ids[b]; });
  store::StoreWriter writer(dir, result.dim, model_id, options);
  std::vector<float> buf(result.dim);
  for (auto i : order) {
    if (drop_all_zero && result.status[i] == SampleStatus::AllZeroDosage) continue;
    auto row = result.row(i);
    std::transform(row.begin(), row.end(), buf.begin(), [](double x) { return static_cast<float>(x); });
    writer.add(result.sample_ids[i], buf);
  }
  return writer.finish();
}

void write_cohort_tsv(const CohortResult& result, std::ostream& out) {
  out << "sample_id\tstatus";
  for (std::size_t d = 0; d < result.dim; ++d) out << "\te" << d;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < result.sample_ids.size(); ++i) {
    out << result.sample_ids[i] << '\t' << to_string(result.status[i]);
    for (double x : result.row(i)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << '\t' << std::string_view(buf, static_cast<std::size_t>(p - buf));
    }
    out << '\n';
  }
}

}  // namespace varembed::aggregate
