#include "spoilkit/review.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>

#include "spoilkit/text.hpp"

namespace spoilkit {

std::string_view to_string(ReviewAction a) {
  switch (a) {
    case ReviewAction::accept: return "accept";
    case ReviewAction::reject: return "reject";
    case ReviewAction::adjust: return "adjust";
  }
  return "accept";
}

ReviewAction parse_review_action(std::string_view s) {
  if (s == "accept") return ReviewAction::accept;
  if (s == "reject") return ReviewAction::reject;
  if (s == "adjust") return ReviewAction::adjust;
  throw ValidationError("unknown review action '" + std::string(s) + "'");
}

Json ReviewDecision::to_json() const {
  Json j = {{"example_id", example_id},
            {"action", to_string(action)},
            {"reviewer", reviewer},
            {"decided_at", decided_at}};
  if (adjusted_span) {
    j["adjusted_span"] = {{"start", adjusted_span->start}, {"end", adjusted_span->end}};
  }
  if (score) j["score"] = *score;
  return j;
}

ReviewDecision ReviewDecision::from_json(const Json& j) {
  ReviewDecision d;
  try {
    d.example_id = j.at("example_id").get<std::string>();
    d.action = parse_review_action(j.at("action").get<std::string>());
    d.reviewer = j.at("reviewer").get<std::string>();
    d.decided_at = j.value("decided_at", std::string());
    if (j.contains("adjusted_span") && !j["adjusted_span"].is_null()) {
      const Json& s = j["adjusted_span"];
      if (s.is_array()) {
        if (s.size() != 2) throw ValidationError("adjusted_span must be [start, end]");
        d.adjusted_span = CharRange{s[0].get<std::size_t>(), s[1].get<std::size_t>()};
      } else {
        d.adjusted_span = CharRange{s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()};
      }
    }
    if (j.contains("score") && !j["score"].is_null()) d.score = j["score"].get<double>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad decision: ") + e.what());
  }
  return d;
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms));
  return buf;
}

DecisionLog::DecisionLog(std::filesystem::path path) : path_(std::move(path)) {
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw IoError("cannot open decision log " + path_.string() + ": " + std::strerror(errno));
  }
}

DecisionLog::~DecisionLog() {
  if (fd_ >= 0) ::close(fd_);
}

void DecisionLog::append(const ReviewDecision& d) {
  const std::string line = canonical_json(d.to_json()) + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("decision log write failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw IoError("decision log fsync failed: " + std::string(std::strerror(errno)));
  }
}

std::vector<ReviewDecision> DecisionLog::read(const std::filesystem::path& path) {
  std::vector<ReviewDecision> out;
  if (!std::filesystem::exists(path)) return out;
  const std::string content = read_file(path);
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (text::trim(lines[i]).empty()) continue;
    if (i + 1 == lines.size() && content.back() != '\n') {
      throw ValidationError(where + ": torn write (no line terminator)");
    }
    try {
      out.push_back(ReviewDecision::from_json(parse_json(lines[i], where)));
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      throw ValidationError(msg.rfind(where, 0) == 0 ? msg : where + ": " + msg);
    }
  }
  return out;
}

Json ReviewQueueState::to_json() const {
  auto count = [&](ReviewAction a) {
    auto it = counts.find(a);
    return it == counts.end() ? std::size_t{0} : it->second;
  };
  return {{"pending", pending.size()},
          {"decided", decided.size()},
          {"accept", count(ReviewAction::accept)},
          {"reject", count(ReviewAction::reject)},
          {"adjust", count(ReviewAction::adjust)},
          {"total", pending.size() + decided.size()}};
}

ReviewStore::ReviewStore(std::vector<LabeledExample> examples) : examples_(std::move(examples)) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    auto& ex = examples_[i];
    ex.review.reset();
    if (!index_.emplace(ex.post.id, i).second) {
      throw ValidationError("duplicate example id '" + ex.post.id + "'");
    }
    if (ex.span.status == SpanStatus::needs_review) state_.pending.insert(ex.post.id);
  }
}

const LabeledExample* ReviewStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &examples_[it->second];
}

const std::vector<ReviewDecision>& ReviewStore::history(std::string_view id) const {
  static const std::vector<ReviewDecision> kEmpty;
  auto it = history_.find(std::string(id));
  return it == history_.end() ? kEmpty : it->second;
}

std::vector<const LabeledExample*> ReviewStore::pending(std::size_t limit) const {
  std::vector<const LabeledExample*> out;
  for (const auto& ex : examples_) {
    if (out.size() >= limit) break;
    if (state_.pending.count(ex.post.id)) out.push_back(&ex);
  }
  return out;
}

ReviewDecision ReviewStore::validate(ReviewDecision d) const {
  const LabeledExample* ex = find(d.example_id);
  if (ex == nullptr) throw NotFoundError("unknown example '" + d.example_id + "'");
  if (ex->span.status != SpanStatus::needs_review) {
    throw ValidationError("example '" + d.example_id + "' is not in the review queue (status " +
                          std::string(to_string(ex->span.status)) + ")");
  }
  if (text::trim(d.reviewer).empty()) throw ValidationError("reviewer must be non-empty");
  d.score.reset();
  if (d.action == ReviewAction::adjust) {
    if (!d.adjusted_span) throw ValidationError("adjust requires adjusted_span");
    const auto [start, end] = *d.adjusted_span;
    const std::size_t len = text::length_cp(ex->post.context);
    if (!(start < end && end <= len)) {
      throw ValidationError("invalid span [" + std::to_string(start) + ", " +
                            std::to_string(end) + ") for context of length " +
                            std::to_string(len));
    }
    d.score = score_span(ex->post.context, *d.adjusted_span, ex->post.answer);
  } else if (d.adjusted_span) {
    throw ValidationError("adjusted_span is only valid with action adjust");
  }
  return d;
}

void ReviewStore::apply(const ReviewDecision& d) {
  auto& ex = examples_[index_.at(d.example_id)];
  if (ex.review) --state_.counts[ex.review->action];
  ex.review = d;
  ++state_.counts[d.action];
  history_[d.example_id].push_back(d);
  state_.pending.erase(d.example_id);
  state_.decided.insert(d.example_id);
}

std::vector<LabeledExample> apply_decisions(std::vector<LabeledExample> examples,
                                            const std::vector<ReviewDecision>& decisions) {
  ReviewStore store(std::move(examples));
  for (const auto& d : decisions) store.apply(store.validate(d));
  return store.examples();
}

namespace {

ReviewStore replayed_store(std::vector<LabeledExample> examples,
                           const std::filesystem::path& log_path) {
  ReviewStore store(std::move(examples));
  const auto decisions = DecisionLog::read(log_path);
  // Line numbers are recovered by re-reading positions of non-blank lines.
  std::size_t line = 0;
  const auto lines = std::filesystem::exists(log_path) ? split_lines(read_file(log_path))
                                                       : std::vector<std::string>{};
  for (const auto& d : decisions) {
    while (line < lines.size() && text::trim(lines[line]).empty()) ++line;
    ++line;
    try {
      ReviewDecision checked = store.validate(d);
      checked.decided_at = d.decided_at;
      store.apply(checked);
    } catch (const ValidationError& e) {
      throw ValidationError(log_path.string() + " line " + std::to_string(line) + ": " +
                            e.what());
    }
  }
  return store;
}

}  // namespace

ReviewService::ReviewService(std::vector<LabeledExample> examples,
                             const std::filesystem::path& log_path)
    : store_(replayed_store(std::move(examples), log_path)), log_(log_path) {}

ReviewDecision ReviewService::record(ReviewDecision d) {
  std::lock_guard commit(commit_mu_);
  if (d.decided_at.empty()) d.decided_at = utc_now_iso8601();
  {
    std::shared_lock read(state_mu_);
    d = store_.validate(std::move(d));
  }
  log_.append(d);
  std::unique_lock write(state_mu_);
  store_.apply(d);
  return d;
}

ReviewQueueState ReviewService::state() const {
  std::shared_lock read(state_mu_);
  return store_.state();
}

namespace {

Json span_json(const SpanLabel& s) {
  Json j = {{"start", s.start},
            {"end", s.end},
            {"score", s.score},
            {"method", to_string(s.method)},
            {"status", to_string(s.status)}};
  if (s.reject_reason) j["reject_reason"] = to_string(*s.reject_reason);
  return j;
}

}  // namespace

Json ReviewService::queue_json(std::size_t limit) const {
  std::shared_lock read(state_mu_);
  Json items = Json::array();
  for (const LabeledExample* ex : store_.pending(limit)) {
    items.push_back({{"id", ex->post.id},
                     {"title", ex->post.question},
                     {"answer", ex->post.answer},
                     {"context", ex->post.context},
                     {"span", {{"start", ex->span.start}, {"end", ex->span.end}}},
                     {"score", ex->span.score},
                     {"status", to_string(ex->span.status)}});
  }
  return {{"items", items}, {"pending", store_.state().pending.size()}};
}

Json ReviewService::example_json(std::string_view id) const {
  std::shared_lock read(state_mu_);
  const LabeledExample* ex = store_.find(id);
  if (ex == nullptr) throw NotFoundError("unknown example '" + std::string(id) + "'");
  Json history = Json::array();
  for (const auto& d : store_.history(id)) history.push_back(d.to_json());
  const CharRange eff = ex->effective_range();
  return {{"id", ex->post.id},
          {"title", ex->post.question},
          {"answer", ex->post.answer},
          {"context", ex->post.context},
          {"source", to_string(ex->post.source)},
          {"span", span_json(ex->span)},
          {"effective_span", {{"start", eff.start}, {"end", eff.end}}},
          {"decision", ex->review ? ex->review->to_json() : Json(nullptr)},
          {"history", history},
          {"pending", store_.state().pending.count(ex->post.id) != 0}};
}

Json ReviewService::stats_json() const {
  std::shared_lock read(state_mu_);
  return store_.state().to_json();
}

std::pair<std::string, int> parse_bind(std::string_view bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ValidationError("bind must be host:port, got '" + std::string(bind) + "'");
  }
  const std::string host(bind.substr(0, colon));
  int port = -1;
  try {
    std::size_t used = 0;
    const std::string p(bind.substr(colon + 1));
    port = std::stoi(p, &used);
    if (used != p.size()) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw ValidationError("bad port in '" + std::string(bind) + "'");
  return {host, port};
}

}  // namespace spoilkit
