#include "evgraph/embedding.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "evgraph/errors.hpp"
#include "evgraph/text.hpp"
#include "json.hpp"

namespace evgraph {
namespace {

constexpr std::uint64_t kSignStateMix = 0x9e3779b97f4a7c15ULL;

std::uint64_t seed_state(std::uint64_t seed) {
  std::uint64_t state = text::kFnvOffset;
  for (int i = 0; i < 8; ++i) {
    state ^= (seed >> (8 * i)) & 0xffu;
    state *= text::kFnvPrime;
  }
  return state;
}

void add_feature(Vector& v, std::string_view ns, std::string_view feature, std::uint64_t seed) {
  const HashedFeature f = hash_feature(ns, feature, static_cast<int>(v.size()), seed);
  v[f.index] += f.sign;
}

void normalize(Vector& v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
}

void check_dim(int d) {
  if (d < 2) throw ConfigError("embedding dimension must be >= 2");
}

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "vector files assume a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw DataError("truncated vector file '" + path + "'");
  return value;
}

}  // namespace

HashedFeature hash_feature(std::string_view ns, std::string_view feature, int d, std::uint64_t seed) {
  const std::uint64_t state = seed_state(seed);
  std::uint64_t h = text::fnv1a64(ns, state);
  h = text::fnv1a64(":", h);
  h = text::fnv1a64(feature, h);
  std::uint64_t s = text::fnv1a64(ns, state ^ kSignStateMix);
  s = text::fnv1a64(":", s);
  s = text::fnv1a64(feature, s);
  return {static_cast<std::uint32_t>(h % static_cast<std::uint64_t>(d)), (std::popcount(s) & 1) ? -1.0 : 1.0};
}

Vector hash_embed_text(std::string_view text, int d, std::uint64_t seed) {
  check_dim(d);
  Vector v = Vector::Zero(d);
  const auto tokens = text::tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_feature(v, "T", tokens[i], seed);
    if (i + 1 < tokens.size()) add_feature(v, "T", tokens[i] + " " + tokens[i + 1], seed);
  }
  normalize(v);
  return v;
}

Vector hash_embed_pair(std::string_view claim, std::string_view evidence, int d, std::uint64_t seed) {
  check_dim(d);
  Vector v = Vector::Zero(d);
  const auto c_tokens = text::tokenize(claim);
  const auto e_tokens = text::tokenize(evidence);
  for (const auto& c : c_tokens) add_feature(v, "C", c, seed);
  for (const auto& e : e_tokens) add_feature(v, "E", e, seed);
  for (const auto& c : c_tokens)
    for (const auto& e : e_tokens) add_feature(v, "X", c + "|" + e, seed);
  normalize(v);
  return v;
}

HashEmbedding::HashEmbedding(int d, std::uint64_t seed) : d_(d), seed_(seed) { check_dim(d); }

Vector HashEmbedding::encode_text(std::string_view text) const { return hash_embed_text(text, d_, seed_); }

Vector HashEmbedding::encode_pair(std::string_view claim, std::string_view evidence) const {
  return hash_embed_pair(claim, evidence, d_, seed_);
}

std::uint64_t text_key(std::string_view text) { return text::fnv1a64(text); }

std::uint64_t pair_key(std::string_view claim, std::string_view evidence) {
  return text::fnv1a64(evidence, text::fnv1a64("\x1f", text::fnv1a64(claim)));
}

PrecomputedEmbedding::PrecomputedEmbedding(int d, std::unordered_map<std::uint64_t, Vector> vectors)
    : d_(d), vectors_(std::move(vectors)) {}

Vector PrecomputedEmbedding::lookup(std::uint64_t key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) {
    std::ostringstream msg;
    msg << "no precomputed vector for key 0x" << std::hex << key;
    throw MissingKeyError(msg.str());
  }
  return it->second;
}

Vector PrecomputedEmbedding::encode_text(std::string_view text) const { return lookup(text_key(text)); }

Vector PrecomputedEmbedding::encode_pair(std::string_view claim, std::string_view evidence) const {
  return lookup(pair_key(claim, evidence));
}

void write_vector_file(const std::string& path, int d, const std::vector<VectorRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vector file '" + path + "'");
  out.write(kVectorFileMagic, 4);
  put<std::uint32_t>(out, kVectorFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<std::uint64_t>(out, records.size());
  for (const auto& r : records) {
    if (static_cast<int>(r.values.size()) != d) throw DimensionError("vector record does not match file dimension");
    put<std::uint64_t>(out, r.key);
    for (float f : r.values) put<float>(out, f);
  }
}

std::unique_ptr<PrecomputedEmbedding> load_precomputed(const std::string& path, std::optional<int> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open vector file '" + path + "'");
  char magic[4] = {};
  in.read(magic, 4);
  std::unordered_map<std::uint64_t, Vector> vectors;
  int d = 0;

  if (in.gcount() == 4 && std::memcmp(magic, kVectorFileMagic, 4) == 0) {
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVectorFileVersion)
      throw DataError("vector file '" + path + "' has unsupported version " + std::to_string(version));
    d = static_cast<int>(get<std::uint32_t>(in, path));
    if (expected_dim && *expected_dim != d)
      throw DimensionError("vector file '" + path + "' has dimension " + std::to_string(d) + ", expected " +
                           std::to_string(*expected_dim));
    const auto count = get<std::uint64_t>(in, path);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto key = get<std::uint64_t>(in, path);
      Vector v(d);
      for (int j = 0; j < d; ++j) v[j] = static_cast<double>(get<float>(in, path));
      vectors[key] = std::move(v);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in vector file '" + path + "'");
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        std::uint64_t key;
        if (j.contains("key")) {
          key = j.at("key").get<std::uint64_t>();
        } else if (j.contains("text")) {
          key = text_key(j.at("text").get<std::string>());
        } else {
          key = pair_key(j.at("claim").get<std::string>(), j.at("evidence").get<std::string>());
        }
        const auto values = j.at("vector").get<std::vector<double>>();
        if (d == 0) {
          d = static_cast<int>(values.size());
          if (expected_dim && *expected_dim != d)
            throw DimensionError("vector file '" + path + "' has dimension " + std::to_string(d) + ", expected " +
                                 std::to_string(*expected_dim));
        } else if (static_cast<int>(values.size()) != d) {
          throw DataError("line " + std::to_string(line_no) + ": vector length differs from earlier records");
        }
        vectors[key] = Eigen::Map<const Vector>(values.data(), d);
      } catch (const nlohmann::json::exception& e) {
        throw DataError("vector file '" + path + "' line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (d == 0) throw DataError("vector file '" + path + "' has no records");
  }
  return std::make_unique<PrecomputedEmbedding>(d, std::move(vectors));
}

double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw DimensionError("cosine of vectors with dimensions " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()));
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

}  // namespace evgraph
