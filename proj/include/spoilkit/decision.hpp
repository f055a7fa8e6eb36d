#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "spoilkit/jsonl.hpp"
#include "spoilkit/metrics.hpp"

namespace spoilkit {

enum class ReviewAction { accept, reject, adjust };

std::string_view to_string(ReviewAction a);
ReviewAction parse_review_action(std::string_view s);

// One human verdict on an auto-labeled span. One JSONL line of the decision
// log.
struct ReviewDecision {
  std::string example_id;
  ReviewAction action = ReviewAction::accept;
  std::optional<CharRange> adjusted_span;  // present iff action == adjust
  std::string reviewer;
  std::string decided_at;  // ISO-8601 UTC
  // Window-F1 of the adjusted span against the answer; set for adjust.
  std::optional<double> score;

  bool operator==(const ReviewDecision&) const = default;

  Json to_json() const;
  static ReviewDecision from_json(const Json& j);
};

}  // namespace spoilkit
