#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace varembed::annotate {

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  /// Throws PreconditionError on empty text.
  virtual std::uint32_t count(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

/// Counts maximal runs of non-whitespace.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::uint32_t count(std::string_view text) const override;
  std::string name() const override { return "ws"; }
};

/// Splits text into pre-tokens with the cl100k pattern. Pieces are byte ranges
/// of the input; invalid UTF-8 bytes are treated as single symbols.
std::vector<std::string_view> pretokenize(std::string_view text);

/// Byte-level BPE over a rank file in tiktoken format ("<base64 bytes> <rank>"
/// per line); lower rank merges first.
class BpeTokenizer final : public Tokenizer {
 public:
  /// Throws VocabLoadError on unreadable or malformed files.
  static BpeTokenizer load(const std::filesystem::path& path);
  static BpeTokenizer parse(std::string_view contents, const std::string& origin = "<memory>");

  std::uint32_t count(std::string_view text) const override;
  std::string name() const override { return "bpe:" + origin_; }

  std::vector<std::uint32_t> encode(std::string_view text) const;
  std::size_t vocab_size() const noexcept { return ranks_.size(); }

 private:
  void encode_piece(std::string_view piece, std::vector<std::uint32_t>& out) const;
  std::uint32_t rank_or_max(std::string_view bytes) const;

  std::unordered_map<std::string, std::uint32_t> ranks_;
  std::string origin_;
};

/// "ws" or "bpe:<vocab path>".
std::unique_ptr<Tokenizer> make_tokenizer(std::string_view spec);

std::string base64_decode(std::string_view text);

}  // namespace varembed::annotate
