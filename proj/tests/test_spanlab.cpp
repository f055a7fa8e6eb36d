#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "spoilkit/errors.hpp"
#include "spoilkit/spanlab.hpp"
#include "spoilkit/text.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace spoilkit {
namespace {

using testing::inject_answer;
using testing::join;
using testing::make_post;
using testing::random_words;
using testing::Rng;
using testing::oracle_fuzzy;

std::string slice(const std::string& s, const SpanLabel& l) {
  return text::slice_cp(s, l.start, l.end);
}

TEST(ExactSpan, XylitolInSentence) {
  const std::string ctx = "The secret is xylitol, an artificial sweetener used in gum.";
  const auto hits = find_exact_span(ctx, "xylitol");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(slice(ctx, hits[0]), "xylitol");
  EXPECT_EQ(hits[0].score, 1.0);
  EXPECT_EQ(hits[0].method, SpanMethod::exact);
}

TEST(ExactSpan, WholeString) {
  const auto hits = find_exact_span("abc", "abc");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].start, 0u);
  EXPECT_EQ(hits[0].end, 3u);
}

TEST(ExactSpan, TwoOccurrences) {
  EXPECT_EQ(find_exact_span("Cats purr. Dogs bark. Cats purr!", "cats purr").size(), 2u);
}

TEST(ExactSpan, CaseAndPunctuationTolerant) {
  const std::string ctx = "He said: \"ARTIFICIAL -- sweetener\" is the answer.";
  const auto hits = find_exact_span(ctx, "Artificial Sweetener.");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(slice(ctx, hits[0]), "ARTIFICIAL -- sweetener");
}

TEST(ExactSpan, OffsetsAreCodePoints) {
  const std::string ctx = "Café owners chose crème brûlée.";
  const auto hits = find_exact_span(ctx, "crème brûlée");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].start, 18u);
  EXPECT_EQ(slice(ctx, hits[0]), "crème brûlée");
}

TEST(ExactSpan, TokenBoundariesRespected) {
  EXPECT_TRUE(find_exact_span("the cathedral", "cat").empty());
}

TEST(FuzzySpan, ParaphrasedAnswer) {
  const std::string ctx =
      "Successful people think differently. They focus only on the outcome, not the process, "
      "so they rarely look back.";
  const std::string ans = "they focus on the outcome and not the process";
  const auto spans = find_fuzzy_span(ctx, ans, {});
  ASSERT_FALSE(spans.empty());
  EXPECT_EQ(slice(ctx, spans[0]), "They focus only on the outcome, not the process");
  EXPECT_NEAR(spans[0].score, 16.0 / 18.0, 1e-12);
  EXPECT_GE(spans[0].score, 0.8);
}

TEST(FuzzySpan, PerfectWindowScoresOne) {
  const auto spans = find_fuzzy_span("alpha beta gamma delta", "beta gamma", {});
  ASSERT_FALSE(spans.empty());
  EXPECT_EQ(spans[0].score, 1.0);
}

TEST(FuzzySpan, DisjointVocabularyGivesNothing) {
  EXPECT_TRUE(find_fuzzy_span("alpha beta gamma", "zeta eta", {}).empty());
}

TEST(LabelExample, CheersAccepted) {
  const auto ex = label_example(
      make_post("fb3", "You'll never guess his reply", "He looked up and said: Cheers. Then left.",
                "Cheers."),
      {});
  EXPECT_EQ(ex.span.status, SpanStatus::auto_accepted);
  EXPECT_EQ(ex.span.method, SpanMethod::exact);
  EXPECT_EQ(text::slice_cp(ex.post.context, ex.span.start, ex.span.end), "Cheers");
}

TEST(LabelExample, TwiceIsAmbiguous) {
  const auto ex = label_example(make_post("x", "q", "Salt works. We tried salt works again.",
                                          "salt works"),
                                {});
  EXPECT_EQ(ex.span.status, SpanStatus::rejected);
  EXPECT_EQ(ex.span.reject_reason, RejectReason::ambiguous_multiple);
}

TEST(LabelExample, SummaryIsRejected) {
  const auto ex = label_example(
      make_post("x", "q",
                "The council met on Tuesday to discuss parking fees near the old market square.",
                "Basically nothing happened and everyone went home annoyed"),
      {});
  EXPECT_EQ(ex.span.status, SpanStatus::rejected);
  EXPECT_EQ(ex.span.reject_reason, RejectReason::answer_is_summary);
}

TEST(LabelExample, FuzzySingleHitNeedsReview) {
  const auto ex = label_example(
      make_post("x", "q",
                "Successful people think differently. They focus only on the outcome, not the "
                "process, so they rarely look back.",
                "they focus on the outcome and not the process"),
      {});
  EXPECT_EQ(ex.span.status, SpanStatus::needs_review);
  EXPECT_EQ(ex.span.method, SpanMethod::fuzzy);
}

TEST(LabelExample, TwoCloseFuzzyHitsAreAmbiguous) {
  const auto ex = label_example(
      make_post("x", "q", "red green blue yellow. filler words here now. red green blue purple.",
                "red green blue black"),
      {});
  EXPECT_EQ(ex.span.status, SpanStatus::rejected);
  EXPECT_EQ(ex.span.reject_reason, RejectReason::ambiguous_multiple);
}

TEST(LabelExample, BetweenHalfTauAndTauIsBelowThreshold) {
  // Best window is "two" alone: F1 = 2/5 = 0.4, in [tau/2, tau).
  const auto ex = label_example(
      make_post("x", "q", "one two three four five six seven", "two nine ten eleven"), {});
  EXPECT_EQ(ex.span.status, SpanStatus::rejected);
  EXPECT_EQ(ex.span.reject_reason, RejectReason::below_threshold);
  EXPECT_NEAR(ex.span.score, 0.4, 1e-12);
}

TEST(LabelExample, ContextShorterThanEveryWindow) {
  LabelerConfig cfg;
  cfg.window_slack = 0;
  // 3 context tokens, 4 answer tokens: no window of length 4 exists.
  const auto ex = label_example(make_post("x", "q", "red green blue.", "red green blue grey"), cfg);
  EXPECT_EQ(ex.span.status, SpanStatus::needs_review);
  EXPECT_NEAR(ex.span.score, 6.0 / 7.0, 1e-12);
  EXPECT_EQ(ex.span.start, 0u);
  EXPECT_EQ(ex.span.end, 14u);
  const auto low = label_example(make_post("x", "q", "red fox", "red one two three"), cfg);
  EXPECT_EQ(low.span.reject_reason, RejectReason::below_threshold);
  EXPECT_NEAR(low.span.score, 2.0 / 6.0, 1e-12);
}

TEST(LabelerConfigCheck, RejectsBadThresholds) {
  EXPECT_THROW((LabelerConfig{0.0, 0.0, 3}.validate()), ValidationError);
  EXPECT_THROW((LabelerConfig{0.5, 0.5, 3}.validate()), ValidationError);
  EXPECT_THROW((LabelerConfig{1.5, 0.1, 3}.validate()), ValidationError);
  EXPECT_NO_THROW((LabelerConfig{1.0, 0.0, 0}.validate()));
}

TEST(FuzzySpan, MatchesExhaustiveOracle) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const std::size_t vocab = rng.between(3, 40);
    const auto ctx = random_words(rng, rng.between(1, 200), vocab);
    const auto ans = random_words(rng, rng.between(1, 20), vocab);
    LabelerConfig cfg;
    cfg.window_slack = rng.below(5);
    cfg.tau = 0.3 + 0.6 * static_cast<double>(rng.below(100)) / 100.0;
    cfg.delta = cfg.tau * static_cast<double>(rng.below(50)) / 100.0;

    // Single spaces: token i starts at the sum of earlier lengths plus i.
    std::vector<std::size_t> starts;
    std::size_t pos = 0;
    for (const auto& w : ctx) {
      starts.push_back(pos);
      pos += w.size() + 1;
    }
    const auto got = find_fuzzy_span(join(ctx), join(ans), cfg);
    const auto want = oracle_fuzzy(ctx, ans, cfg);
    ASSERT_EQ(got.size(), want.size()) << "case " << i;
    for (std::size_t k = 0; k < got.size(); ++k) {
      ASSERT_EQ(got[k].start, starts[want[k].first]);
      ASSERT_EQ(got[k].end, starts[want[k].first + want[k].len - 1] +
                                ctx[want[k].first + want[k].len - 1].size());
      ASSERT_NEAR(got[k].score, want[k].score, 1e-12);
    }
  }
}

TEST(LabelExample, InjectedAnswersAreRecovered) {
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const auto inj = inject_answer(rng, 1);
    const auto ex = label_example(make_post("p", "q", inj.context, inj.answer), {});
    ASSERT_EQ(ex.span.status, SpanStatus::auto_accepted) << inj.context;
    ASSERT_EQ(ex.span.start, inj.starts[0]);
    ASSERT_EQ(ex.span.end, inj.starts[0] + inj.core_length);
  }
}

TEST(LabelExample, TwiceInjectedAnswersAreRejected) {
  Rng rng(100);
  for (int i = 0; i < 500; ++i) {
    const auto inj = inject_answer(rng, 2);
    const auto ex = label_example(make_post("p", "q", inj.context, inj.answer), {});
    ASSERT_EQ(ex.span.status, SpanStatus::rejected);
    ASSERT_EQ(ex.span.reject_reason, RejectReason::ambiguous_multiple);
  }
}

TEST(LabelExample, StoredScoreIsReproducible) {
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    const std::size_t vocab = rng.between(4, 30);
    const std::string ctx = join(random_words(rng, rng.between(1, 80), vocab));
    const std::string ans = join(random_words(rng, rng.between(1, 10), vocab));
    const auto ex = label_example(make_post("p", "q", ctx, ans), {});
    ASSERT_LT(ex.span.start, ex.span.end);
    ASSERT_LE(ex.span.end, text::length_cp(ctx));
    ASSERT_EQ(ex.span.status == SpanStatus::rejected, ex.span.reject_reason.has_value());
    ASSERT_NEAR(score_span(ctx, ex.span.range(), ans), ex.span.score, 1e-9);
    ASSERT_EQ(label_example(make_post("p", "q", ctx, ans), {}), ex);
  }
}

TEST(LabeledFile, RoundTrip) {
  std::vector<LabeledExample> examples;
  for (const auto& p : testing::twenty_posts()) examples.push_back(label_example(p, {}));
  const std::string once = serialize_labeled(examples);
  EXPECT_EQ(parse_labeled(once), examples);
  EXPECT_EQ(serialize_labeled(parse_labeled(once)), once);
}

TEST(LabeledFile, RejectsBadSpan) {
  auto ex = label_example(make_post("p", "q", "abc def", "abc"), {});
  Json j = ex.to_json();
  j["span"]["end"] = 99;
  EXPECT_THROW(LabeledExample::from_json(j), ValidationError);
}

TEST(LabelCorpus, HistogramCountsStatuses) {
  const Corpus c({make_post("a", "q", "alpha beta gamma", "beta"),
                  make_post("b", "q", "alpha beta alpha beta", "alpha beta"),
                  make_post("c", "q", "alpha beta gamma", "zeta eta theta")});
  const LabelRun run = label_corpus(c, {});
  EXPECT_EQ(run.histogram.at("auto_accepted"), 1u);
  EXPECT_EQ(run.histogram.at("rejected:ambiguous_multiple"), 1u);
  EXPECT_EQ(run.histogram.at("rejected:answer_is_summary"), 1u);
}

}  // namespace
}  // namespace spoilkit
