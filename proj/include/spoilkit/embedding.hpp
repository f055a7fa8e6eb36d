#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "spoilkit/metrics.hpp"

namespace spoilkit {

using Vector = std::vector<double>;

// Maps each token of a sequence to a unit-norm vector. Implementations must
// be callable from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Vector> embed(const TokenSeq& tokens) const = 0;
  virtual std::size_t dimension() const = 0;
};

inline constexpr double kUnitNormTolerance = 1e-6;

// Throws ValidationError unless `v` has `dim` entries and L2 norm 1 within
// kUnitNormTolerance.
void check_unit_vector(const Vector& v, std::size_t dim, std::string_view what);

// Basis vector per vocabulary entry. Tokens outside the vocabulary throw.
class OneHotProvider final : public EmbeddingProvider {
 public:
  explicit OneHotProvider(const std::vector<std::string>& vocabulary);
  static OneHotProvider from_sequences(const std::vector<TokenSeq>& seqs);

  std::vector<Vector> embed(const TokenSeq& tokens) const override;
  std::size_t dimension() const override { return index_.size(); }

 private:
  std::map<std::string, std::size_t> index_;
};

// Deterministic pseudo-random unit vector per token type, derived from a
// seed and a stable hash of the token.
class HashProvider final : public EmbeddingProvider {
 public:
  HashProvider(std::uint64_t seed, std::size_t dimension);

  std::vector<Vector> embed(const TokenSeq& tokens) const override;
  std::size_t dimension() const override { return dim_; }
  Vector vector_for(const std::string& token) const;

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

// Precomputed vectors loaded from JSONL records {"token": ..., "vector": [...]}.
// Non-unit vectors are rejected at load time; unknown tokens throw.
class LookupProvider final : public EmbeddingProvider {
 public:
  static LookupProvider parse(std::string_view content);
  static LookupProvider load(const std::filesystem::path& path);

  std::vector<Vector> embed(const TokenSeq& tokens) const override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::unordered_map<std::string, Vector> table_;
  std::size_t dim_ = 0;
};

// Remote provider: POST {path} with {"tokens": [...]}, expecting
// {"vectors": [[...], ...]}. Each call uses its own connection, so calls
// from multiple threads are independent request/response exchanges.
class HttpProvider final : public EmbeddingProvider {
 public:
  // `base_url` like "http://127.0.0.1:8000". The dimension is discovered
  // with a probe request unless given.
  HttpProvider(std::string base_url, std::string path = "/embed",
               std::size_t dimension = 0);

  std::vector<Vector> embed(const TokenSeq& tokens) const override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::vector<Vector> request(const std::vector<std::string>& tokens) const;

  std::string base_url_;
  std::string path_;
  std::size_t dim_ = 0;
};

}  // namespace spoilkit
