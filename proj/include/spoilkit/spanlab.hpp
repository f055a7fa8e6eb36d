#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoilkit/corpus.hpp"
#include "spoilkit/decision.hpp"
#include "spoilkit/metrics.hpp"

namespace spoilkit {

enum class SpanMethod { exact, fuzzy };
enum class SpanStatus { auto_accepted, needs_review, rejected };
enum class RejectReason { below_threshold, ambiguous_multiple, answer_is_summary };

std::string_view to_string(SpanMethod m);
std::string_view to_string(SpanStatus s);
std::string_view to_string(RejectReason r);
SpanStatus parse_span_status(std::string_view s);

// Code point range into the post's context, with provenance.
struct SpanLabel {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  double score = 0.0;     // window F1 against the answer, in [0, 1]
  SpanMethod method = SpanMethod::exact;
  SpanStatus status = SpanStatus::needs_review;
  std::optional<RejectReason> reject_reason;  // present iff rejected

  CharRange range() const { return {start, end}; }
  bool operator==(const SpanLabel&) const = default;
};

struct LabelerConfig {
  double tau = 0.65;               // acceptance threshold
  double delta = 0.05;             // ambiguity margin
  std::size_t window_slack = 3;    // k: window lengths |a|-k .. |a|+k tokens

  // Throws ValidationError unless 0 < tau <= 1 and 0 <= delta < tau.
  void validate() const;
};

struct LabeledExample {
  ClickbaitPost post;
  SpanLabel span;
  std::optional<ReviewDecision> review;  // latest effective decision

  // The span an extractive export would use: the adjusted span when the
  // latest decision is adjust, otherwise the automatic one.
  CharRange effective_range() const;
  // auto_accepted, or reviewed with accept/adjust.
  bool extractive_ready() const;
  // Rejected by the labeler (and not rescued) or by a reviewer.
  bool excluded_from_extractive() const;

  bool operator==(const LabeledExample&) const = default;

  Json to_json() const;
  static LabeledExample from_json(const Json& j);
};

// Token-multiset F1: 2 * overlap / (|window| + |answer|); 0 when both empty.
double window_f1(const std::vector<std::string>& window,
                 const std::vector<std::string>& answer);

// Tokenizes context[range] and scores it against the answer.
double score_span(std::string_view context, CharRange range, std::string_view answer);

// Every occurrence of the answer's token sequence in the context's token
// sequence: case-insensitive, and punctuation only separates tokens.
std::vector<SpanLabel> find_exact_span(std::string_view context, std::string_view answer);

// Windows of |a|-k .. |a|+k tokens scored by window_f1. All windows scoring
// at least tau - delta are ranked (score desc, start asc, length asc) and
// greedily kept unless they overlap an already kept window. Sorted by that
// ranking.
std::vector<SpanLabel> find_fuzzy_span(std::string_view context, std::string_view answer,
                                       const LabelerConfig& cfg);

LabeledExample label_example(const ClickbaitPost& post, const LabelerConfig& cfg);

struct LabelRun {
  std::vector<LabeledExample> examples;
  std::map<std::string, std::size_t> histogram;  // status or status:reason -> count

  Json summary() const;
};

LabelRun label_corpus(const Corpus& corpus, const LabelerConfig& cfg);

std::string serialize_labeled(const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> parse_labeled(std::string_view content);
std::vector<LabeledExample> load_labeled(const std::filesystem::path& path);

}  // namespace spoilkit
