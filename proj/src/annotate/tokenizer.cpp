#include "varembed/annotate/tokenizer.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "varembed/core/errors.hpp"

namespace varembed::annotate {
namespace {

struct CodeRange {
  char32_t lo;
  char32_t hi;
};

#include "unicode_tables.inc"

constexpr char32_t kInvalid = 0xFFFFFFFF;

template <std::size_t N>
bool in_table(const CodeRange (&table)[N], char32_t cp) {
  auto it = std::upper_bound(std::begin(table), std::end(table), cp,
                             [](char32_t v, const CodeRange& r) { return v < r.lo; });
  if (it == std::begin(table)) return false;
  --it;
  return cp <= it->hi;
}

bool is_letter(char32_t cp) { return cp != kInvalid && in_table(kLetters, cp); }
bool is_number(char32_t cp) { return cp != kInvalid && in_table(kNumbers, cp); }
bool is_space(char32_t cp) { return cp != kInvalid && in_table(kWhitespace, cp); }
bool is_newline(char32_t cp) { return cp == '\r' || cp == '\n'; }

struct CodePoint {
  char32_t cp;
  std::size_t offset;
};

/// Decodes UTF-8; malformed sequences become one kInvalid symbol per byte.
std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (b < 0x80) {
      len = 1, cp = b;
    } else if ((b & 0xE0) == 0xC0) {
      len = 2, cp = b & 0x1F, min = 0x80;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3, cp = b & 0x0F, min = 0x800;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4, cp = b & 0x07, min = 0x10000;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (!ok) {
      out.push_back({kInvalid, i});
      ++i;
      continue;
    }
    out.push_back({cp, i});
    i += len;
  }
  return out;
}

char32_t fold(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp - 'A' + 'a';
  if (cp == 0x17F) return 's';  // LATIN SMALL LETTER LONG S folds to s
  return cp;
}

/// Length (in code points) of the match starting at i.
std::size_t match_at(const std::vector<CodePoint>& cps, std::size_t i) {
  const std::size_t n = cps.size();
  auto at = [&](std::size_t k) { return cps[k].cp; };

  // Contractions: '(?i:[sdmt]|ll|ve|re)
  if (at(i) == '\'' && i + 1 < n) {
    const char32_t a = fold(at(i + 1));
    if (a == 's' || a == 'd' || a == 'm' || a == 't') return 2;
    if (i + 2 < n) {
      const char32_t b = fold(at(i + 2));
      if ((a == 'l' && b == 'l') || (a == 'v' && b == 'e') || (a == 'r' && b == 'e')) return 3;
    }
  }
  // [^\r\n\p{L}\p{N}]?+\p{L}++
  {
    std::size_t j = i;
    if (!is_newline(at(j)) && !is_letter(at(j)) && !is_number(at(j))) ++j;
    if (j < n && is_letter(at(j))) {
      while (j < n && is_letter(at(j))) ++j;
      return j - i;
    }
  }
  // \p{N}{1,3}+
  if (is_number(at(i))) {
    std::size_t j = i;
    while (j < n && j - i < 3 && is_number(at(j))) ++j;
    return j - i;
  }
  // ' ?[^\s\p{L}\p{N}]++[\r\n]*+'
  {
    std::size_t j = i;
    if (at(j) == ' ') ++j;
    auto punct = [&](std::size_t k) {
      return !is_space(at(k)) && !is_letter(at(k)) && !is_number(at(k));
    };
    if (j < n && punct(j)) {
      while (j < n && punct(j)) ++j;
      while (j < n && is_newline(at(j))) ++j;
      return j - i;
    }
  }
  // Whitespace alternatives: \s++$ | \s*[\r\n] | \s+(?!\S) | \s
  std::size_t k = i;
  while (k < n && is_space(at(k))) ++k;
  if (k == i) return 1;  // unreachable: every symbol class is covered above
  if (k == n) return k - i;
  for (std::size_t m = k; m-- > i;) {
    if (is_newline(at(m))) return m + 1 - i;
  }
  if (k - i >= 2) return k - i - 1;
  return 1;
}

struct Part {
  std::size_t start;
  std::uint32_t rank;
};

}  // namespace

std::uint32_t WhitespaceTokenizer::count(std::string_view text) const {
  std::uint32_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  if (n == 0) throw PreconditionError("count_tokens: empty text");
  return n;
}

std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> pieces;
  const auto cps = decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    const std::size_t len = match_at(cps, i);
    const std::size_t begin = cps[i].offset;
    const std::size_t end = i + len < cps.size() ? cps[i + len].offset : text.size();
    pieces.push_back(text.substr(begin, end - begin));
    i += len;
  }
  return pieces;
}

std::string base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) throw FormatError("base64: length not a multiple of 4");
  std::string out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + static_cast<std::size_t>(k)];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0 || (v[k] = value(c)) < 0) throw FormatError("base64: invalid character");
    }
    const std::uint32_t x = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out += static_cast<char>((x >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((x >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(x & 0xff);
  }
  return out;
}

BpeTokenizer BpeTokenizer::parse(std::string_view contents, const std::string& origin) {
  BpeTokenizer tok;
  tok.origin_ = origin;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw VocabLoadError(origin + ":" + std::to_string(line_no) + ": " + why);
    };
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos || sp == 0) fail("expected '<base64> <rank>'");
    std::string bytes;
    try {
      bytes = base64_decode(line.substr(0, sp));
    } catch (const FormatError& e) {
      fail(e.what());
    }
    if (bytes.empty()) fail("empty token");
    const auto rank_text = line.substr(sp + 1);
    std::uint32_t rank = 0;
    auto [ptr, ec] = std::from_chars(rank_text.data(), rank_text.data() + rank_text.size(), rank);
    if (ec != std::errc() || ptr != rank_text.data() + rank_text.size() ||
        rank == std::numeric_limits<std::uint32_t>::max()) {
      fail("invalid rank");
    }
    if (!tok.ranks_.emplace(std::move(bytes), rank).second) fail("duplicate token");
  }
  if (tok.ranks_.empty()) throw VocabLoadError(origin + ": empty vocabulary");
  for (int b = 0; b < 256; ++b) {
    if (!tok.ranks_.count(std::string(1, static_cast<char>(b)))) {
      throw VocabLoadError(origin + ": vocabulary lacks single-byte token " + std::to_string(b));
    }
  }
  return tok;
}

BpeTokenizer BpeTokenizer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VocabLoadError("cannot open vocabulary " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::uint32_t BpeTokenizer::rank_or_max(std::string_view bytes) const {
  auto it = ranks_.find(std::string(bytes));
  return it == ranks_.end() ? std::numeric_limits<std::uint32_t>::max() : it->second;
}

// Same merge order as the reference byte-pair merge: repeatedly join the
// adjacent pair with the lowest rank, leftmost on ties.
void BpeTokenizer::encode_piece(std::string_view piece, std::vector<std::uint32_t>& out) const {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (auto whole = rank_or_max(piece); whole != kMax) {
    out.push_back(whole);
    return;
  }
  std::vector<Part> parts;
  parts.reserve(piece.size() + 1);
  for (std::size_t i = 0; i + 1 < piece.size(); ++i) parts.push_back({i, rank_or_max(piece.substr(i, 2))});
  parts.push_back({piece.size() - 1, kMax});
  parts.push_back({piece.size(), kMax});
  auto rank_for = [&](std::size_t i) {
    if (i + 3 < parts.size()) {
      return rank_or_max(piece.substr(parts[i].start, parts[i + 3].start - parts[i].start));
    }
    return kMax;
  };
  while (parts.size() > 1) {
    std::size_t best = 0;
    std::uint32_t best_rank = kMax;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (parts[i].rank < best_rank) {
        best_rank = parts[i].rank;
        best = i;
      }
    }
    if (best_rank == kMax) break;
    parts[best].rank = rank_for(best);
    if (best > 0) parts[best - 1].rank = rank_for(best - 1);
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    out.push_back(rank_or_max(piece.substr(parts[i].start, parts[i + 1].start - parts[i].start)));
  }
}

std::vector<std::uint32_t> BpeTokenizer::encode(std::string_view text) const {
  std::vector<std::uint32_t> out;
  for (auto piece : pretokenize(text)) encode_piece(piece, out);
  return out;
}

std::uint32_t BpeTokenizer::count(std::string_view text) const {
  if (text.empty()) throw PreconditionError("count_tokens: empty text");
  return static_cast<std::uint32_t>(encode(text).size());
}

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view spec) {
  if (spec == "ws" || spec == "whitespace") return std::make_unique<WhitespaceTokenizer>();
  if (spec.substr(0, 4) == "bpe:") {
    return std::make_unique<BpeTokenizer>(BpeTokenizer::load(std::string(spec.substr(4))));
  }
  throw ConfigError("unknown tokenizer '" + std::string(spec) + "' (expected ws or bpe:<vocab>)");
}

}  // namespace varembed::annotate
