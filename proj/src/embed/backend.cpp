#include "varembed/embed/backend.hpp"

#include <cmath>
#include <map>

#include "varembed/core/errors.hpp"
#include "varembed/core/hash.hpp"
#include "varembed/core/rng.hpp"
#include "varembed/embed/remote.hpp"
#include "varembed/embed/subprocess.hpp"

namespace varembed::embed {
namespace {

double unit_interval(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::map<std::string, std::string> parse_params(std::string_view text, std::string_view spec) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = text.substr(pos, comma - pos);
    auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ConfigError("bad backend parameter '" + std::string(item) + "' in " + std::string(spec));
    }
    out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    pos = comma + 1;
  }
  return out;
}

std::uint64_t param_u64(const std::map<std::string, std::string>& params, const std::string& name,
                        std::optional<std::uint64_t> fallback, std::string_view spec) {
  auto it = params.find(name);
  if (it == params.end()) {
    if (fallback) return *fallback;
    throw ConfigError("backend " + std::string(spec) + " needs " + name + "=");
  }
  try {
    std::size_t used = 0;
    auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("backend parameter " + name + " must be an integer");
  }
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
  if (dim == 0) throw ConfigError("mock backend dim must be positive");
}

std::vector<float> MockBackend::vector_for(std::string_view text) const {
  std::uint64_t state = xxh64(text, seed_);
  std::vector<double> v(dim_);
  double norm = 0.0;
  for (auto& x : v) {
    x = 2.0 * unit_interval(state) - 1.0;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

std::vector<EmbeddingVector> MockBackend::embed(const std::vector<EmbedItem>& batch) {
  std::vector<EmbeddingVector> out;
  out.reserve(batch.size());
  const auto id = model_id();
  for (const auto& item : batch) out.push_back({vector_for(item.text), id});
  return out;
}

std::string MockBackend::model_id() const {
  return "mock:seed=" + std::to_string(seed_) + ",dim=" + std::to_string(dim_);
}

std::optional<VariantKey> identity_from_text(std::string_view text) {
  constexpr std::string_view kLead = "Variant ";
  if (text.substr(0, kLead.size()) != kLead) return std::nullopt;
  text.remove_prefix(kLead.size());
  const auto end = text.find_first_of(" .(");
  return VariantKey::try_parse(text.substr(0, end));
}

InformativeMockBackend::InformativeMockBackend(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < kIdentityDims) {
    throw ConfigError("informative backend needs dim >= " + std::to_string(kIdentityDims));
  }
}

std::vector<float> InformativeMockBackend::vector_for(std::string_view text) const {
  std::vector<float> out(dim_, 0.0f);
  if (auto key = identity_from_text(text)) {
    out[static_cast<std::size_t>(key->chromosome().rank())] = 1.0f;
    switch (key->ref().front()) {
      case 'A': out[25] = 1.0f; break;
      case 'C': out[26] = 1.0f; break;
      case 'G': out[27] = 1.0f; break;
      case 'T': out[28] = 1.0f; break;
      default: break;
    }
    out[29] = static_cast<float>(key->position() / 250e6);
  }
  std::uint64_t state = xxh64(text, seed_ ^ 0x1f0a7e5bULL);
  for (std::size_t i = kIdentityDims; i < dim_; ++i) {
    out[i] = static_cast<float>(kNoise * (2.0 * unit_interval(state) - 1.0));
  }
  return out;
}

std::vector<EmbeddingVector> InformativeMockBackend::embed(const std::vector<EmbedItem>& batch) {
  std::vector<EmbeddingVector> out;
  out.reserve(batch.size());
  const auto id = model_id();
  for (const auto& item : batch) out.push_back({vector_for(item.text), id});
  return out;
}

std::string InformativeMockBackend::model_id() const {
  return "informative:dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_);
}

std::unique_ptr<Backend> make_backend(std::string_view spec) {
  const auto colon = spec.find(':');
  const auto kind = spec.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (kind == "mock") {
    auto p = parse_params(rest, spec);
    return std::make_unique<MockBackend>(param_u64(p, "seed", 0, spec), param_u64(p, "dim", std::nullopt, spec));
  }
  if (kind == "informative") {
    auto p = parse_params(rest, spec);
    return std::make_unique<InformativeMockBackend>(param_u64(p, "dim", std::nullopt, spec),
                                                    param_u64(p, "seed", 0, spec));
  }
  if (kind == "remote") return std::make_unique<RemoteBackend>(RemoteConfig::load(std::string(rest)));
  if (kind == "subprocess") {
    return std::make_unique<SubprocessBackend>(SubprocessConfig::load(std::string(rest)));
  }
  throw ConfigError("unknown backend '" + std::string(spec) + "'");
}

}  // namespace varembed::embed
