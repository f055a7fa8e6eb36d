#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spoilkit {

// Precision/recall/F1, each in [0, 1].
struct MetricTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // F1 is the harmonic mean, or 0 when P + R == 0.
  static MetricTriple from_pr(double precision, double recall);

  bool operator==(const MetricTriple&) const = default;
};

// Half-open code point range [start, end).
struct CharRange {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharRange&) const = default;
};

struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<CharRange> offsets;  // strictly increasing, non-overlapping

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// NFKC, lowercase, split on every run of non-alphanumeric characters. No
// stemming or stopwords. Offsets index the NFKC form of `text`, which is
// `text` itself for pipeline data (normalized at ingestion).
TokenSeq tokenize(std::string_view text);

// Convenience for tests: a TokenSeq from pre-split tokens (offsets synthetic).
TokenSeq make_token_seq(std::vector<std::string> tokens);

// Clipped multiset n-gram overlap. Throws std::invalid_argument if n < 1.
MetricTriple rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// LCS-based, beta = 1.
MetricTriple rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

class EmbeddingProvider;

// Greedy max-cosine matching: recall averages, over reference tokens, the
// best similarity to any candidate token; precision swaps the roles. Each
// best similarity is clamped to [0, 1]. No IDF weighting, no rescaling.
// Throws std::invalid_argument if either side is empty.
MetricTriple semantic_score(const TokenSeq& candidate, const TokenSeq& reference,
                            const EmbeddingProvider& provider);

// Component-wise macro mean. Throws std::invalid_argument on empty input.
MetricTriple aggregate(std::span<const MetricTriple> scores);

}  // namespace spoilkit
