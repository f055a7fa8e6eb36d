#include "spoilkit/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "spoilkit/embedding.hpp"
#include "spoilkit/text.hpp"

namespace spoilkit {

MetricTriple MetricTriple::from_pr(double precision, double recall) {
  const double sum = precision + recall;
  return {precision, recall, sum > 0.0 ? 2.0 * precision * recall / sum : 0.0};
}

TokenSeq tokenize(std::string_view input) {
  const std::u32string cps = text::to_u32(text::nfkc(input));
  TokenSeq seq;
  std::string current;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= cps.size(); ++i) {
    if (i < cps.size() && text::is_word_char(cps[i])) {
      if (current.empty()) start = i;
      text::append_utf8(current, text::to_lower(cps[i]));
      continue;
    }
    if (!current.empty()) {
      seq.tokens.push_back(std::move(current));
      seq.offsets.push_back({start, i});
      current.clear();
    }
  }
  return seq;
}

TokenSeq make_token_seq(std::vector<std::string> tokens) {
  TokenSeq seq;
  std::size_t pos = 0;
  for (auto& t : tokens) {
    const std::size_t len = std::max<std::size_t>(1, text::length_cp(t));
    seq.offsets.push_back({pos, pos + len});
    pos += len + 1;
    seq.tokens.push_back(std::move(t));
  }
  return seq;
}

namespace {

std::unordered_map<std::string, int> count_ngrams(const std::vector<std::string>& tokens,
                                                  std::size_t n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

MetricTriple rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto un = static_cast<std::size_t>(n);
  const std::size_t cand_total = candidate.size() >= un ? candidate.size() - un + 1 : 0;
  const std::size_t ref_total = reference.size() >= un ? reference.size() - un + 1 : 0;
  if (cand_total == 0 || ref_total == 0) return {};

  const auto cand = count_ngrams(candidate.tokens, un);
  const auto ref = count_ngrams(reference.tokens, un);
  std::size_t overlap = 0;
  for (const auto& [gram, c] : cand) {
    if (auto it = ref.find(gram); it != ref.end()) {
      overlap += static_cast<std::size_t>(std::min(c, it->second));
    }
  }
  return MetricTriple::from_pr(static_cast<double>(overlap) / static_cast<double>(cand_total),
                               static_cast<double>(overlap) / static_cast<double>(ref_total));
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

MetricTriple rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto l = static_cast<double>(lcs_length(candidate.tokens, reference.tokens));
  return MetricTriple::from_pr(l / static_cast<double>(candidate.size()),
                               l / static_cast<double>(reference.size()));
}

namespace {

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Mean over `from` of the best clamped similarity to any vector in `to`.
double greedy_mean(const std::vector<Vector>& from, const std::vector<Vector>& to) {
  double total = 0.0;
  for (const auto& f : from) {
    double best = 0.0;
    for (const auto& t : to) best = std::max(best, dot(f, t));
    total += std::clamp(best, 0.0, 1.0);
  }
  return total / static_cast<double>(from.size());
}

}  // namespace

MetricTriple semantic_score(const TokenSeq& candidate, const TokenSeq& reference,
                            const EmbeddingProvider& provider) {
  if (candidate.empty() || reference.empty()) {
    throw std::invalid_argument("semantic_score: empty candidate or reference");
  }
  const std::size_t dim = provider.dimension();
  if (dim == 0) throw std::invalid_argument("semantic_score: provider dimension is 0");
  const auto cand = provider.embed(candidate);
  const auto ref = provider.embed(reference);
  if (cand.size() != candidate.size() || ref.size() != reference.size()) {
    throw std::runtime_error("embedding provider returned wrong vector count");
  }
  for (const auto& v : cand) check_unit_vector(v, dim, "candidate embedding");
  for (const auto& v : ref) check_unit_vector(v, dim, "reference embedding");
  return MetricTriple::from_pr(greedy_mean(cand, ref), greedy_mean(ref, cand));
}

MetricTriple aggregate(std::span<const MetricTriple> scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate: empty score list");
  MetricTriple sum;
  for (const auto& s : scores) {
    sum.precision += s.precision;
    sum.recall += s.recall;
    sum.f1 += s.f1;
  }
  const auto n = static_cast<double>(scores.size());
  return {sum.precision / n, sum.recall / n, sum.f1 / n};
}

}  // namespace spoilkit
