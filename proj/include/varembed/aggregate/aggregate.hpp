#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "varembed/core/types.hpp"
#include "varembed/join/variant_index.hpp"
#include "varembed/store/store.hpp"

namespace varembed::aggregate {

constexpr std::uint8_t kMissing = 255;

/// Dense samples × variants genotype dosages, row-major; kMissing marks no call.
struct DosageMatrix {
  std::vector<std::string> sample_ids;
  std::vector<VariantKey> variant_keys;
  std::vector<std::uint8_t> dosages;

  std::size_t samples() const noexcept { return sample_ids.size(); }
  std::size_t variants() const noexcept { return variant_keys.size(); }
  std::uint8_t at(std::size_t sample, std::size_t variant) const {
    return dosages[sample * variants() + variant];
  }
  /// Shape and value-set checks; throws FormatError.
  void validate() const;
};

/// Binary layout: "VEDOSE01" | u32 n_samples | u32 n_variants |
/// n_samples × (u32 len, id bytes) | row-major u8 dosages (255 = missing).
/// Variant keys travel separately (one per line).
void write_dosage_binary(const std::filesystem::path& path, const DosageMatrix& m);
DosageMatrix read_dosage_binary(const std::filesystem::path& path, std::vector<VariantKey> keys);

/// TSV layout: header "sample_id<TAB>key..." then one row per sample; "NA" or
/// "." for missing.
void write_dosage_tsv(const std::filesystem::path& path, const DosageMatrix& m);
DosageMatrix read_dosage_tsv(const std::filesystem::path& path);

std::vector<VariantKey> read_key_list(const std::filesystem::path& path);

/// Detects the binary magic; binary input needs a key list.
DosageMatrix load_dosages(const std::filesystem::path& path,
                          const std::optional<std::filesystem::path>& keys_path);

enum class MissingPolicy { Skip, Zero };
MissingPolicy parse_missing_policy(std::string_view text);

enum class Weighting {
  Mean,  // Σ d·e / Σ d
  Sum,   // Σ d·e
};

struct AggregateOptions {
  MissingPolicy policy = MissingPolicy::Skip;
  Weighting weighting = Weighting::Mean;
  std::size_t chunk_variants = 1024;
  std::size_t threads = 1;
};

/// Resolution of dataset keys against the store's orientation.
struct ResolvedVariant {
  std::string store_key;
  bool flipped = false;
};

/// Direct key first, then the ref/alt exchange. Throws KeyNotInStore.
std::vector<ResolvedVariant> resolve_keys(const std::vector<VariantKey>& keys,
                                          const store::EmbeddingStore& store);

/// Missing policy, then flip (d -> 2 - d). Returns the effective weight, or a
/// negative value when the entry is skipped.
double effective_dosage(std::uint8_t raw, bool flipped, MissingPolicy policy);

/// Math layer: Σ wᵢ·eᵢ / Σ wᵢ over arbitrary non-negative weights.
/// Throws AllZeroDosage when Σ wᵢ == 0 (Mean weighting only).
std::vector<double> weighted_combination(std::span<const double> weights,
                                         const std::vector<std::vector<float>>& embeddings,
                                         Weighting weighting = Weighting::Mean);

/// One sample's embedding. Throws AllZeroDosage or KeyNotInStore.
EmbeddingVector individual_embedding(std::span<const std::uint8_t> dosage_row,
                                     const store::EmbeddingStore& store,
                                     const std::vector<VariantKey>& keys,
                                     const AggregateOptions& options = {});

enum class SampleStatus { Ok, AllZeroDosage };
std::string_view to_string(SampleStatus s) noexcept;

struct CohortResult {
  std::vector<std::string> sample_ids;
  std::size_t dim = 0;
  std::vector<double> embeddings;  // samples × dim; zero rows for AllZeroDosage
  std::vector<SampleStatus> status;
  std::size_t flipped_variants = 0;

  std::span<const double> row(std::size_t i) const { return {embeddings.data() + i * dim, dim}; }
  std::size_t all_zero_count() const;
};

/// Column-chunked accumulation; per-sample failures land in `status`.
CohortResult aggregate_cohort(const DosageMatrix& matrix, const store::EmbeddingStore& store,
                              const AggregateOptions& options = {});

/// Sample-keyed store (AllZeroDosage rows skipped when `drop_all_zero`).
store::Manifest write_cohort_store(const CohortResult& result, const std::filesystem::path& dir,
                                   const std::string& model_id, bool drop_all_zero,
                                   store::WriteOptions options = {});
void write_cohort_tsv(const CohortResult& result, std::ostream& out);

}  // namespace varembed::aggregate
