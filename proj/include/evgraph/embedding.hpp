#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace evgraph {

using Vector = Eigen::VectorXd;

inline constexpr int kDefaultEmbeddingDim = 1024;

// Encoder abstraction. encode_text embeds a single text for similarity
// search; encode_pair embeds a claim-evidence pair as a node feature.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  virtual Vector encode_text(std::string_view text) const = 0;
  virtual Vector encode_pair(std::string_view claim, std::string_view evidence) const = 0;
};

// Feature hashing: FNV-1a 64 over "<namespace>:<feature>" starting from a
// seed-dependent state. Bucket = hash mod d; sign = parity of the popcount of
// a second hash taken from a different starting state.
struct HashedFeature {
  std::uint32_t index = 0;
  double sign = 1.0;
};
HashedFeature hash_feature(std::string_view ns, std::string_view feature, int d, std::uint64_t seed);

// Unigrams and bigrams of text::tokenize(text) in namespace "T", summed with
// signs and unit-normalized. Empty text gives the zero vector.
Vector hash_embed_text(std::string_view text, int d, std::uint64_t seed);

// Claim unigrams ("C"), evidence unigrams ("E") and every claim x evidence
// token pair ("X", feature "<c>|<e>"), summed and unit-normalized.
Vector hash_embed_pair(std::string_view claim, std::string_view evidence, int d, std::uint64_t seed);

class HashEmbedding : public EmbeddingProvider {
 public:
  HashEmbedding(int d, std::uint64_t seed);

  int dimension() const override { return d_; }
  std::uint64_t seed() const { return seed_; }
  Vector encode_text(std::string_view text) const override;
  Vector encode_pair(std::string_view claim, std::string_view evidence) const override;

 private:
  int d_;
  std::uint64_t seed_;
};

// Keys of the vector file: FNV-1a 64 of the UTF-8 text, or of
// claim + '\x1f' + evidence for pair entries.
std::uint64_t text_key(std::string_view text);
std::uint64_t pair_key(std::string_view claim, std::string_view evidence);

// Serves vectors computed elsewhere (e.g. a transformer encoder). A missing
// key raises MissingKeyError; there is no fallback.
class PrecomputedEmbedding : public EmbeddingProvider {
 public:
  PrecomputedEmbedding(int d, std::unordered_map<std::uint64_t, Vector> vectors);

  int dimension() const override { return d_; }
  std::size_t size() const { return vectors_.size(); }
  Vector lookup(std::uint64_t key) const;
  Vector encode_text(std::string_view text) const override;
  Vector encode_pair(std::string_view claim, std::string_view evidence) const override;

 private:
  int d_;
  std::unordered_map<std::uint64_t, Vector> vectors_;
};

// Binary layout, little-endian: magic "EVGV", u32 version (1), u32 d,
// u64 count, then count records of (u64 key, d x f32).
inline constexpr char kVectorFileMagic[4] = {'E', 'V', 'G', 'V'};
inline constexpr std::uint32_t kVectorFileVersion = 1;

struct VectorRecord {
  std::uint64_t key = 0;
  std::vector<float> values;
};

void write_vector_file(const std::string& path, int d, const std::vector<VectorRecord>& records);

// Reads the binary format, or the JSON-lines debug format when the magic is
// absent: one object per line with "vector" and one of "key", "text", or
// "claim"+"evidence". Throws DataError on malformed input and DimensionError
// when `expected_dim` is given and differs from the file.
std::unique_ptr<PrecomputedEmbedding> load_precomputed(const std::string& path,
                                                       std::optional<int> expected_dim = std::nullopt);

// u.v / (|u||v|), 0 when either norm is 0. Throws DimensionError.
double cosine(const Vector& u, const Vector& v);

}  // namespace evgraph
