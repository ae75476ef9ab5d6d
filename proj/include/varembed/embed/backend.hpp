#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "varembed/core/types.hpp"

namespace varembed::embed {

struct EmbedItem {
  std::string_view key;
  std::string_view text;
};

/// One vector per item, order-aligned with the request.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::vector<EmbeddingVector> embed(const std::vector<EmbedItem>& batch) = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string model_id() const = 0;
  /// Whether embed() may be called from several threads at once.
  virtual bool concurrent() const { return true; }
};

/// Pseudo-random unit vector determined by (seed, text).
class MockBackend final : public Backend {
 public:
  MockBackend(std::uint64_t seed, std::size_t dim);
  std::vector<EmbeddingVector> embed(const std::vector<EmbedItem>& batch) override;
  std::size_t dim() const override { return dim_; }
  std::string model_id() const override;

  std::vector<float> vector_for(std::string_view text) const;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

/// Mock whose leading block encodes the variant identity parsed from the
/// annotation text, so identity tasks are learnable.
///   [0, 25)  chromosome one-hot (1..22, X, Y, MT)
///   [25, 29) reference allele one-hot on its first base (A, C, G, T)
///   [29]     position / 250e6
///   [30, 64) zero
///   [64, d)  noise in [-0.1, 0.1) seeded by the text
class InformativeMockBackend final : public Backend {
 public:
  static constexpr std::size_t kIdentityDims = 64;
  static constexpr double kNoise = 0.1;

  /// Throws ConfigError when dim < kIdentityDims.
  explicit InformativeMockBackend(std::size_t dim, std::uint64_t seed = 0);
  std::vector<EmbeddingVector> embed(const std::vector<EmbedItem>& batch) override;
  std::size_t dim() const override { return dim_; }
  std::string model_id() const override;

  std::vector<float> vector_for(std::string_view text) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Extracts the key from an identity sentence ("Variant 5-148992859-C-A ...").
std::optional<VariantKey> identity_from_text(std::string_view text);

/// Parses "mock:seed=7,dim=16", "informative:dim=1024[,seed=N]",
/// "remote:<cfg.json>" or "subprocess:<cfg.json>".
std::unique_ptr<Backend> make_backend(std::string_view spec);

}  // namespace varembed::embed
