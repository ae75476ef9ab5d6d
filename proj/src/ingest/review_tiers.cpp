#include "varembed/ingest/review_tiers.hpp"

#include <cstdlib>
#include <fstream>

#include "varembed/core/errors.hpp"

#ifndef VAREMBED_DEFAULT_DATA_DIR
#define VAREMBED_DEFAULT_DATA_DIR "data"
#endif

namespace varembed::ingest {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("VAREMBED_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return VAREMBED_DEFAULT_DATA_DIR;
}

std::string ReviewTierTable::normalize(std::string_view status) {
  std::string out;
  bool pending_space = false;
  for (char c : status) {
    if (c == '_' || c == ' ' || c == '\t') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

ReviewTierTable ReviewTierTable::parse(std::istream& in) {
  ReviewTierTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw ConfigError("review tier table line " + std::to_string(line_no) + ": missing tab");
    }
    int tier = -1;
    try {
      tier = std::stoi(line.substr(tab + 1));
    } catch (...) {
    }
    if (tier < 0 || tier > 4) {
      throw ConfigError("review tier table line " + std::to_string(line_no) + ": tier not in 0-4");
    }
    table.tiers_[normalize(line.substr(0, tab))] = tier;
  }
  if (table.tiers_.empty()) throw ConfigError("review tier table is empty");
  return table;
}

ReviewTierTable ReviewTierTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open review tier table " + path.string());
  return parse(in);
}

ReviewTierTable ReviewTierTable::load_default() {
  return load(data_dir() / "clinvar_review_tiers.tsv");
}

std::optional<ReviewStatus> ReviewTierTable::lookup(std::string_view status) const {
  auto key = normalize(status);
  auto it = tiers_.find(key);
  if (it == tiers_.end()) return std::nullopt;
  return ReviewStatus{it->second, key};
}

}  // namespace varembed::ingest
