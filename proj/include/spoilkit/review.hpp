#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spoilkit/decision.hpp"
#include "spoilkit/errors.hpp"
#include "spoilkit/spanlab.hpp"

namespace spoilkit {

// Decision for an id the service does not know (HTTP 404).
class NotFoundError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

std::string utc_now_iso8601();

// Append-only JSONL file of ReviewDecision. Every append is fsync'ed before
// it returns; earlier bytes are never rewritten.
class DecisionLog {
 public:
  explicit DecisionLog(std::filesystem::path path);
  ~DecisionLog();
  DecisionLog(const DecisionLog&) = delete;
  DecisionLog& operator=(const DecisionLog&) = delete;

  void append(const ReviewDecision& d);
  const std::filesystem::path& path() const { return path_; }

  // Reads every decision. A line that does not parse, including a torn
  // final line, throws ValidationError naming its 1-based line number.
  static std::vector<ReviewDecision> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

struct ReviewQueueState {
  std::set<std::string> pending;  // needs_review without a decision
  std::set<std::string> decided;
  std::map<ReviewAction, std::size_t> counts;  // by latest action

  bool operator==(const ReviewQueueState&) const = default;
  Json to_json() const;
};

// In-memory review state over a labeled file. Not synchronized.
class ReviewStore {
 public:
  explicit ReviewStore(std::vector<LabeledExample> examples);

  // Checks the decision against the current examples and fills in the
  // re-scored window F1 for adjust. Throws NotFoundError for unknown ids and
  // ValidationError for examples outside the review queue or bad spans.
  ReviewDecision validate(ReviewDecision d) const;
  // Applies an already validated decision; latest wins, history is kept.
  void apply(const ReviewDecision& d);

  const ReviewQueueState& state() const { return state_; }
  const LabeledExample* find(std::string_view id) const;
  const std::vector<ReviewDecision>& history(std::string_view id) const;
  std::vector<const LabeledExample*> pending(std::size_t limit) const;
  const std::vector<LabeledExample>& examples() const { return examples_; }

 private:
  std::vector<LabeledExample> examples_;  // input order
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<ReviewDecision>> history_;
  ReviewQueueState state_;
};

// Overlays the latest decision per id onto the examples (export path).
// Decisions are validated as the service would.
std::vector<LabeledExample> apply_decisions(std::vector<LabeledExample> examples,
                                            const std::vector<ReviewDecision>& decisions);

// Store plus durable log with the locking the HTTP handlers need: readers
// share a lock; writers are serialized and hold the exclusive lock only to
// apply an already-durable decision.
class ReviewService {
 public:
  // Replays the log; throws ValidationError on a corrupt line.
  ReviewService(std::vector<LabeledExample> examples, const std::filesystem::path& log_path);

  // Validates, appends (fsync) and applies. `decided_at` is stamped when
  // empty.
  ReviewDecision record(ReviewDecision d);

  ReviewQueueState state() const;
  Json queue_json(std::size_t limit) const;
  Json example_json(std::string_view id) const;  // throws NotFoundError
  Json stats_json() const;

 private:
  mutable std::shared_mutex state_mu_;
  std::mutex commit_mu_;
  ReviewStore store_;
  DecisionLog log_;
};

// Blocking HTTP front end for a ReviewService.
class ReviewServer {
 public:
  explicit ReviewServer(ReviewService& service,
                        std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~ReviewServer();

  // Binds and serves until stop(). Throws IoError if binding fails.
  void listen(const std::string& host, int port);
  // Binds to an ephemeral port and returns it; call serve() afterwards.
  int bind_any(const std::string& host);
  void serve();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Splits "host:port"; throws ValidationError.
std::pair<std::string, int> parse_bind(std::string_view bind);

}  // namespace spoilkit
