#include "spoilkit/spanlab.hpp"

#include <algorithm>
#include <unordered_map>

#include "spoilkit/errors.hpp"
#include "spoilkit/text.hpp"

namespace spoilkit {

std::string_view to_string(SpanMethod m) {
  return m == SpanMethod::exact ? "exact" : "fuzzy";
}

std::string_view to_string(SpanStatus s) {
  switch (s) {
    case SpanStatus::auto_accepted: return "auto_accepted";
    case SpanStatus::needs_review: return "needs_review";
    case SpanStatus::rejected: return "rejected";
  }
  return "rejected";
}

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::below_threshold: return "below_threshold";
    case RejectReason::ambiguous_multiple: return "ambiguous_multiple";
    case RejectReason::answer_is_summary: return "answer_is_summary";
  }
  return "below_threshold";
}

SpanStatus parse_span_status(std::string_view s) {
  if (s == "auto_accepted") return SpanStatus::auto_accepted;
  if (s == "needs_review") return SpanStatus::needs_review;
  if (s == "rejected") return SpanStatus::rejected;
  throw ValidationError("unknown span status '" + std::string(s) + "'");
}

namespace {

SpanMethod parse_method(std::string_view s) {
  if (s == "exact") return SpanMethod::exact;
  if (s == "fuzzy") return SpanMethod::fuzzy;
  throw ValidationError("unknown span method '" + std::string(s) + "'");
}

RejectReason parse_reason(std::string_view s) {
  if (s == "below_threshold") return RejectReason::below_threshold;
  if (s == "ambiguous_multiple") return RejectReason::ambiguous_multiple;
  if (s == "answer_is_summary") return RejectReason::answer_is_summary;
  throw ValidationError("unknown reject reason '" + std::string(s) + "'");
}

// Tolerance for the tau - delta cut so that e.g. 0.65 - 0.05 admits 0.6.
constexpr double kScoreEps = 1e-12;

struct Window {
  double score;
  std::size_t first;   // token index
  std::size_t length;  // tokens
};

bool ranks_before(const Window& a, const Window& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.first != b.first) return a.first < b.first;
  return a.length < b.length;
}

// Calls visit(Window) for every window of the allowed lengths, maintaining
// the multiset overlap incrementally per length.
template <typename Visit>
void scan_windows(const std::vector<std::string>& context,
                  const std::vector<std::string>& answer, std::size_t slack, Visit&& visit) {
  const std::size_t m = answer.size();
  const std::size_t n = context.size();
  if (m == 0 || n == 0) return;

  std::unordered_map<std::string_view, int> ids;
  std::vector<int> need;
  for (const auto& t : answer) {
    auto [it, fresh] = ids.try_emplace(t, static_cast<int>(need.size()));
    if (fresh) need.push_back(0);
    ++need[static_cast<std::size_t>(it->second)];
  }
  std::vector<int> ctx_ids(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (auto it = ids.find(context[i]); it != ids.end()) ctx_ids[i] = it->second;
  }

  const std::size_t min_len = m > slack ? m - slack : 1;
  const std::size_t max_len = std::min(n, m + slack);
  std::vector<int> have(need.size());
  for (std::size_t len = min_len; len <= max_len; ++len) {
    std::fill(have.begin(), have.end(), 0);
    std::size_t overlap = 0;
    auto add = [&](std::size_t pos) {
      const int id = ctx_ids[pos];
      if (id < 0) return;
      auto& h = have[static_cast<std::size_t>(id)];
      if (h < need[static_cast<std::size_t>(id)]) ++overlap;
      ++h;
    };
    auto remove = [&](std::size_t pos) {
      const int id = ctx_ids[pos];
      if (id < 0) return;
      auto& h = have[static_cast<std::size_t>(id)];
      --h;
      if (h < need[static_cast<std::size_t>(id)]) --overlap;
    };
    for (std::size_t i = 0; i < len; ++i) add(i);
    for (std::size_t first = 0;; ++first) {
      const double score = 2.0 * static_cast<double>(overlap) / static_cast<double>(len + m);
      visit(Window{score, first, len});
      if (first + len >= n) break;
      remove(first);
      add(first + len);
    }
  }
}

SpanLabel window_label(const TokenSeq& ctx, const Window& w, SpanMethod method) {
  SpanLabel s;
  s.start = ctx.offsets[w.first].start;
  s.end = ctx.offsets[w.first + w.length - 1].end;
  s.score = w.score;
  s.method = method;
  s.status = method == SpanMethod::exact ? SpanStatus::auto_accepted : SpanStatus::needs_review;
  return s;
}

std::vector<Window> ranked_windows(const TokenSeq& ctx, const TokenSeq& ans,
                                   const LabelerConfig& cfg) {
  const double threshold = cfg.tau - cfg.delta - kScoreEps;
  std::vector<Window> candidates;
  scan_windows(ctx.tokens, ans.tokens, cfg.window_slack, [&](const Window& w) {
    if (w.score > 0.0 && w.score >= threshold) candidates.push_back(w);
  });
  std::sort(candidates.begin(), candidates.end(), ranks_before);

  std::vector<Window> kept;
  std::vector<bool> taken(ctx.size(), false);
  for (const auto& w : candidates) {
    const auto begin = taken.begin() + static_cast<std::ptrdiff_t>(w.first);
    const auto end = begin + static_cast<std::ptrdiff_t>(w.length);
    if (std::find(begin, end, true) != end) continue;
    std::fill(begin, end, true);
    kept.push_back(w);
  }
  return kept;
}

SpanLabel reject(SpanLabel s, RejectReason reason) {
  s.status = SpanStatus::rejected;
  s.reject_reason = reason;
  return s;
}

}  // namespace

void LabelerConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1]");
  if (!(delta >= 0.0 && delta < tau)) throw ValidationError("delta must lie in [0, tau)");
}

double window_f1(const std::vector<std::string>& window,
                 const std::vector<std::string>& answer) {
  if (window.empty() && answer.empty()) return 0.0;
  std::unordered_map<std::string_view, int> counts;
  for (const auto& t : answer) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : window) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(window.size() + answer.size());
}

double score_span(std::string_view context, CharRange range, std::string_view answer) {
  return window_f1(tokenize(text::slice_cp(context, range.start, range.end)).tokens,
                   tokenize(answer).tokens);
}

std::vector<SpanLabel> find_exact_span(std::string_view context, std::string_view answer) {
  const TokenSeq ctx = tokenize(context);
  const TokenSeq ans = tokenize(answer);
  std::vector<SpanLabel> hits;
  if (ans.empty() || ctx.size() < ans.size()) return hits;
  for (std::size_t i = 0; i + ans.size() <= ctx.size(); ++i) {
    if (std::equal(ans.tokens.begin(), ans.tokens.end(),
                   ctx.tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      hits.push_back(window_label(ctx, Window{1.0, i, ans.size()}, SpanMethod::exact));
    }
  }
  return hits;
}

std::vector<SpanLabel> find_fuzzy_span(std::string_view context, std::string_view answer,
                                       const LabelerConfig& cfg) {
  cfg.validate();
  const TokenSeq ctx = tokenize(context);
  const TokenSeq ans = tokenize(answer);
  std::vector<SpanLabel> out;
  for (const auto& w : ranked_windows(ctx, ans, cfg)) {
    out.push_back(window_label(ctx, w, SpanMethod::fuzzy));
  }
  return out;
}

LabeledExample label_example(const ClickbaitPost& post, const LabelerConfig& cfg) {
  cfg.validate();
  LabeledExample ex;
  ex.post = post;

  const auto exact = find_exact_span(post.context, post.answer);
  if (exact.size() == 1) {
    ex.span = exact.front();
    ex.span.status = SpanStatus::auto_accepted;
    return ex;
  }
  if (exact.size() > 1) {
    ex.span = reject(exact.front(), RejectReason::ambiguous_multiple);
    return ex;
  }

  const TokenSeq ctx = tokenize(post.context);
  const TokenSeq ans = tokenize(post.answer);
  const auto ranked = ranked_windows(ctx, ans, cfg);
  if (!ranked.empty() && ranked.front().score >= cfg.tau - kScoreEps) {
    const Window& best = ranked.front();
    ex.span = window_label(ctx, best, SpanMethod::fuzzy);
    if (ranked.size() > 1 && ranked[1].score >= best.score - cfg.delta - kScoreEps) {
      ex.span = reject(ex.span, RejectReason::ambiguous_multiple);
    }
    return ex;
  }

  // Below tau: keep the best window seen (thresholded or not) for audit.
  std::optional<Window> best;
  scan_windows(ctx.tokens, ans.tokens, cfg.window_slack, [&](const Window& w) {
    if (!best || ranks_before(w, *best)) best = w;
  });
  if (!best && !ctx.empty()) {
    // Context shorter than |a| - k: the whole token run is the only
    // candidate, and a human decides if it clears tau.
    best = Window{window_f1(ctx.tokens, ans.tokens), 0, ctx.size()};
    if (best->score >= cfg.tau - kScoreEps) {
      ex.span = window_label(ctx, *best, SpanMethod::fuzzy);
      return ex;
    }
  }
  if (best) {
    ex.span = window_label(ctx, *best, SpanMethod::fuzzy);
  } else {
    ex.span.start = 0;
    ex.span.end = text::length_cp(post.context);
    ex.span.score = 0.0;
    ex.span.method = SpanMethod::fuzzy;
  }
  const bool summary = !ans.empty() && ex.span.score < cfg.tau / 2.0;
  ex.span = reject(ex.span, summary ? RejectReason::answer_is_summary
                                    : RejectReason::below_threshold);
  return ex;
}

CharRange LabeledExample::effective_range() const {
  if (review && review->action == ReviewAction::adjust && review->adjusted_span) {
    return *review->adjusted_span;
  }
  return span.range();
}

bool LabeledExample::extractive_ready() const {
  if (review) return review->action != ReviewAction::reject;
  return span.status == SpanStatus::auto_accepted;
}

bool LabeledExample::excluded_from_extractive() const {
  if (review) return review->action == ReviewAction::reject;
  return span.status == SpanStatus::rejected;
}

Json LabeledExample::to_json() const {
  Json s = {{"start", span.start},
            {"end", span.end},
            {"score", span.score},
            {"method", to_string(span.method)},
            {"status", to_string(span.status)}};
  if (span.reject_reason) s["reject_reason"] = to_string(*span.reject_reason);
  Json j = {{"post", spoilkit::to_json(post)}, {"span", s}};
  if (review) j["review"] = review->to_json();
  return j;
}

LabeledExample LabeledExample::from_json(const Json& j) {
  LabeledExample ex;
  try {
    ex.post = post_from_json(j.at("post"));
    const Json& s = j.at("span");
    ex.span.start = s.at("start").get<std::size_t>();
    ex.span.end = s.at("end").get<std::size_t>();
    ex.span.score = s.at("score").get<double>();
    ex.span.method = parse_method(s.at("method").get<std::string>());
    ex.span.status = parse_span_status(s.at("status").get<std::string>());
    if (s.contains("reject_reason")) {
      ex.span.reject_reason = parse_reason(s["reject_reason"].get<std::string>());
    }
    if (j.contains("review")) ex.review = ReviewDecision::from_json(j["review"]);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad labeled record: ") + e.what());
  }
  const std::size_t len = text::length_cp(ex.post.context);
  if (!(ex.span.start < ex.span.end && ex.span.end <= len)) {
    throw ValidationError("labeled record '" + ex.post.id + "': span outside context");
  }
  if ((ex.span.status == SpanStatus::rejected) != ex.span.reject_reason.has_value()) {
    throw ValidationError("labeled record '" + ex.post.id + "': reject_reason mismatch");
  }
  return ex;
}

Json LabelRun::summary() const {
  return {{"count", examples.size()}, {"histogram", histogram}};
}

LabelRun label_corpus(const Corpus& corpus, const LabelerConfig& cfg) {
  LabelRun run;
  run.examples.reserve(corpus.size());
  for (const auto& post : corpus.posts()) {
    LabeledExample ex = label_example(post, cfg);
    std::string key(to_string(ex.span.status));
    if (ex.span.reject_reason) key += ":" + std::string(to_string(*ex.span.reject_reason));
    ++run.histogram[key];
    run.examples.push_back(std::move(ex));
  }
  return run;
}

std::string serialize_labeled(const std::vector<LabeledExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += canonical_json(ex.to_json());
    out.push_back('\n');
  }
  return out;
}

std::vector<LabeledExample> parse_labeled(std::string_view content) {
  std::vector<LabeledExample> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    out.push_back(LabeledExample::from_json(
        parse_json(line, "labeled line " + std::to_string(line_no))));
  }
  return out;
}

std::vector<LabeledExample> load_labeled(const std::filesystem::path& path) {
  return parse_labeled(read_file(path));
}

}  // namespace spoilkit
