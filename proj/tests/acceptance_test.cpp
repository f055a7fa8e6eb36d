// Acceptance suite. Each check prints one PASS/FAIL line; the process exits
// non-zero if any check fails. No network and no review UI are needed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "spoilkit/cleaner.hpp"
#include "spoilkit/corpus.hpp"
#include "spoilkit/dataset.hpp"
#include "spoilkit/embedding.hpp"
#include "spoilkit/evalrun.hpp"
#include "spoilkit/review.hpp"
#include "spoilkit/text.hpp"
#include "support.hpp"

namespace spoilkit {
namespace {

using namespace testing;

// Thrown by require() to end a check early with a reason.
struct Failed {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

bool near(const MetricTriple& a, const MetricTriple& b, double tol) {
  return near(a.precision, b.precision, tol) && near(a.recall, b.recall, tol) &&
         near(a.f1, b.f1, tol);
}

std::string show(const MetricTriple& t) {
  std::ostringstream s;
  s.precision(17);
  s << "(" << t.precision << ", " << t.recall << ", " << t.f1 << ")";
  return s.str();
}

// Returns a detail string for the PASS line.
using Check = std::function<std::string()>;

std::string rouge_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t vocab = rng.between(2, 15);
    const auto c = random_words(rng, rng.below(51), vocab);
    const auto r = random_words(rng, rng.below(51), vocab);
    for (std::size_t n : {1u, 2u, 3u}) {
      const auto got = rouge_n(make_token_seq(c), make_token_seq(r), static_cast<int>(n));
      const auto want = naive_rouge_n(c, r, n);
      require(near(got, want, 1e-9), "rouge_n pair " + std::to_string(i) + ": " + show(got) +
                                         " vs " + show(want));
    }
    const std::size_t lv = rng.between(2, 6);
    const auto a = random_words(rng, rng.below(13), lv);
    const auto b = random_words(rng, rng.below(13), lv);
    const std::size_t l = brute_lcs(a, 0, b, 0);
    const auto got = rouge_l(make_token_seq(a), make_token_seq(b));
    MetricTriple want;
    if (!a.empty() && !b.empty()) {
      want = MetricTriple::from_pr(static_cast<double>(l) / a.size(),
                                   static_cast<double>(l) / b.size());
    }
    require(near(got, want, 1e-9), "rouge_l pair " + std::to_string(i));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < 10.0, "took " + std::to_string(secs) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "1000 pairs, tol 1e-9, %.2f s", secs);
  return buf;
}

std::string metric_fixtures() {
  const TokenSeq ref = tokenize("Artificial Sweetener.");
  const TokenSeq cand = tokenize("xylitol, an artificial sweetener");
  const auto r1 = rouge_n(cand, ref, 1);
  require(near(r1, {0.5, 1.0, 2.0 / 3.0}, 1e-12), "xylitol fixture ROUGE-1 " + show(r1));

  const HashProvider hash(7, 32);
  for (const char* s : {"the cat sat on the mat", "Artificial Sweetener.", "a b a b c"}) {
    const TokenSeq t = tokenize(s);
    const MetricTriple one{1, 1, 1};
    require(near(rouge_n(t, t, 1), one, 1e-12), std::string("ROUGE-1 identity: ") + s);
    require(near(rouge_n(t, t, 2), one, 1e-12), std::string("ROUGE-2 identity: ") + s);
    require(near(rouge_l(t, t), one, 1e-12), std::string("ROUGE-L identity: ") + s);
    require(near(semantic_score(t, t, hash), one, 1e-9), std::string("semantic identity: ") + s);
  }
  return "ROUGE-1 (0.5, 1, 2/3); identity (1,1,1) on 4 metrics";
}

std::string semantic_reduction() {
  Rng rng(1002);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t vocab = rng.between(2, 20);
    const auto c = random_words(rng, rng.between(1, 30), vocab);
    const auto r = random_words(rng, rng.between(1, 30), vocab);
    const TokenSeq cs = make_token_seq(c), rs = make_token_seq(r);
    const auto provider = OneHotProvider::from_sequences({cs, rs});
    // Under one-hot vectors a reference token scores 1 exactly when its type
    // occurs in the candidate, and 0 otherwise.
    const std::set<std::string> types(c.begin(), c.end());
    std::size_t hit = 0;
    for (const auto& t : r) hit += types.count(t);
    const double want = static_cast<double>(hit) / static_cast<double>(r.size());
    require(semantic_score(cs, rs, provider).recall == want,
            "one-hot recall pair " + std::to_string(i));
  }
  const HashProvider hash(99, 48);
  for (int i = 0; i < 300; ++i) {
    auto c = random_words(rng, rng.between(1, 25), 40);
    auto r = random_words(rng, rng.between(1, 25), 40);
    const auto base = semantic_score(make_token_seq(c), make_token_seq(r), hash);
    for (double v : {base.precision, base.recall, base.f1}) {
      require(v >= 0.0 && v <= 1.0, "hash score out of range");
    }
    rng.shuffle(c);
    rng.shuffle(r);
    require(near(semantic_score(make_token_seq(c), make_token_seq(r), hash), base, 1e-12),
            "hash provider not permutation invariant, pair " + std::to_string(i));
  }
  return "1000 one-hot pairs exact; 300 hash pairs in [0,1] and permutation invariant";
}

std::string span_recovery() {
  Rng rng(1003);
  for (int i = 0; i < 500; ++i) {
    const auto inj = inject_answer(rng, 1);
    const auto ex = label_example(make_post("p", "q", inj.context, inj.answer), {});
    require(ex.span.status == SpanStatus::auto_accepted, "not auto_accepted: " + inj.context);
    require(ex.span.start == inj.starts[0] && ex.span.end == inj.starts[0] + inj.core_length,
            "wrong offsets: " + inj.context);
  }
  for (int i = 0; i < 500; ++i) {
    const auto inj = inject_answer(rng, 2);
    const auto ex = label_example(make_post("p", "q", inj.context, inj.answer), {});
    require(ex.span.status == SpanStatus::rejected &&
                ex.span.reject_reason == RejectReason::ambiguous_multiple,
            "twice-injected not rejected: " + inj.context);
  }
  return "500/500 auto_accepted with exact offsets; 500/500 ambiguous_multiple";
}

std::string fuzzy_oracle() {
  Rng rng(1004);
  for (int i = 0; i < 200; ++i) {
    const std::size_t vocab = rng.between(3, 40);
    const auto ctx = random_words(rng, rng.between(1, 200), vocab);
    const auto ans = random_words(rng, rng.between(1, 20), vocab);
    LabelerConfig cfg;
    cfg.window_slack = rng.below(5);
    cfg.tau = 0.3 + 0.6 * static_cast<double>(rng.below(100)) / 100.0;
    cfg.delta = cfg.tau * static_cast<double>(rng.below(50)) / 100.0;
    std::vector<std::size_t> starts;
    std::size_t pos = 0;
    for (const auto& w : ctx) {
      starts.push_back(pos);
      pos += w.size() + 1;
    }
    const auto got = find_fuzzy_span(join(ctx), join(ans), cfg);
    const auto want = oracle_fuzzy(ctx, ans, cfg);
    require(got.size() == want.size(), "candidate count, case " + std::to_string(i));
    for (std::size_t k = 0; k < got.size(); ++k) {
      const std::size_t last = want[k].first + want[k].len - 1;
      require(got[k].start == starts[want[k].first] &&
                  got[k].end == starts[last] + ctx[last].size() &&
                  near(got[k].score, want[k].score, 1e-12),
              "candidate " + std::to_string(k) + ", case " + std::to_string(i));
    }
  }
  return "200 pairs equal to exhaustive enumeration";
}

std::vector<LabeledExample> examples_for(std::size_t reddit, std::size_t facebook) {
  std::vector<LabeledExample> out;
  auto add = [&](Source src, char tag, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      LabeledExample ex;
      ex.post = make_post(std::string(1, tag) + std::to_string(i), "q", "ctx", "a", src);
      out.push_back(std::move(ex));
    }
  };
  add(Source::reddit, 'r', reddit);
  add(Source::facebook, 'f', facebook);
  return out;
}

bool within_rounding(std::size_t got, double want) { return std::fabs(got - want) <= 1.0; }

std::string split_contract() {
  const std::vector<std::pair<std::size_t, std::size_t>> corpora = {
      {10, 0}, {100, 0}, {2538, 0}, {0, 1287}, {2538, 1287}};
  for (const auto& [nr, nf] : corpora) {
    const auto examples = examples_for(nr, nf);
    const std::string label = std::to_string(nr + nf);
    const DataSplit s = split_corpus(examples, 42);
    for (const auto& [tag, n] : {std::pair{'r', nr}, std::pair{'f', nf}}) {
      if (n == 0) continue;
      auto count = [tag = tag](const std::vector<std::string>& ids) {
        return static_cast<std::size_t>(
            std::count_if(ids.begin(), ids.end(), [&](const auto& id) { return id[0] == tag; }));
      };
      require(within_rounding(count(s.train), 0.8 * n) &&
                  within_rounding(count(s.validation), 0.1 * n) &&
                  within_rounding(count(s.test), 0.1 * n),
              "ratio off for stratum " + std::string(1, tag) + " of " + label);
    }
    std::multiset<std::string> all;
    for (SplitPart p : {SplitPart::train, SplitPart::validation, SplitPart::test}) {
      all.insert(s.part(p).begin(), s.part(p).end());
    }
    std::multiset<std::string> ids;
    for (const auto& ex : examples) ids.insert(ex.post.id);
    require(all == ids, "not a partition for " + label);

    auto shuffled = examples;
    Rng rng(nr * 7 + nf);
    rng.shuffle(shuffled);
    const DataSplit again = split_corpus(shuffled, 42);
    require(again.train == s.train && again.validation == s.validation && again.test == s.test,
            "not deterministic for " + label);
  }
  return "sizes 10, 100, 2538, 1287, 3825";
}

// Runs ingest, clean, label, split and eval in-process on the 20-post fixture.
EvalReport pipeline(bool empty_predictions, const EmbeddingProvider* provider) {
  std::string dump;
  for (const auto& p : twenty_posts()) {
    dump += Json{{"id", p.id}, {"title", p.question}, {"article", p.context}, {"answer", p.answer}}
                .dump() +
            "\n";
  }
  const Corpus corpus = ingest_records(dump, {Source::reddit, DumpFormat::jsonl, std::nullopt});
  const CleanReport cleaned = clean_corpus(corpus, RuleSet::defaults());
  const LabelRun labeled = label_corpus(cleaned.corpus, {});
  const DataSplit split = split_corpus(labeled.examples, 42);
  const auto refs = references_for(labeled.examples, split, SplitPart::test);
  PredictionSet preds{empty_predictions ? "empty" : "oracle", {}};
  for (const auto& r : refs) preds.predictions[r.id] = empty_predictions ? "" : r.answer;
  return {{evaluate(preds, refs, provider)}, "test", refs.size()};
}

std::string end_to_end() {
  const HashProvider hash(5, 64);
  const auto ceiling = format_cells(pipeline(false, &hash).rows[0]);
  require(ceiling == std::vector<std::string>(12, "100.00"), "ceiling row not all 100.00");
  const auto plain = format_cells(pipeline(false, nullptr).rows[0]);
  require(std::count(plain.begin(), plain.end(), "100.00") == 9 &&
              std::count(plain.begin(), plain.end(), "n/a") == 3,
          "ceiling row without provider");
  const auto floor = format_cells(pipeline(true, nullptr).rows[0]);
  require(std::count(floor.begin(), floor.end(), "0.00") == 9 &&
              std::count(floor.begin(), floor.end(), "n/a") == 3,
          "floor row");
  const auto floor_hash = format_cells(pipeline(true, &hash).rows[0]);
  require(floor_hash == std::vector<std::string>(12, "0.00"), "floor row with provider");
  return "ceiling 100.00 x12, floor 0.00 x9 + n/a x3";
}

std::string export_consistency() {
  Rng rng(1005);
  for (int round = 0; round < 100; ++round) {
    std::vector<LabeledExample> examples;
    for (std::size_t i = 0, n = rng.between(10, 40); i < n; ++i) {
      auto inj = inject_answer(rng, 1);
      // Multi-byte text ahead of the answer makes code points and bytes differ.
      const std::string lead = rng.chance(0.5) ? "Café naïve résumé · " : "";
      examples.push_back(label_example(
          make_post("e" + std::to_string(i), "Question " + std::to_string(i) + "?",
                    lead + inj.context, inj.answer),
          {}));
    }
    const DataSplit split = split_corpus(examples, round);
    for (SplitPart p : {SplitPart::train, SplitPart::validation, SplitPart::test}) {
      const std::string bytes = export_extractive(examples, split, p);
      const auto records = parse_extractive(bytes);
      for (const auto& r : records) {
        const std::size_t len = text::length_cp(r.answer_text);
        require(text::slice_cp(r.context, r.answer_start, r.answer_start + len) == r.answer_text,
                "slice mismatch for " + r.id);
      }
      require(write_extractive(records) == bytes, "round trip not byte-identical");
    }
  }
  return "100 random exports, slices exact, byte-identical round trip";
}

// Queue of injected examples marked needs_review, plus auto-accepted and
// rejected ones outside the queue.
std::vector<LabeledExample> review_fixture(Rng& rng, std::vector<CharRange>& truth) {
  std::vector<LabeledExample> examples;
  const std::size_t queued = rng.between(3, 12);
  for (std::size_t i = 0; i < queued; ++i) {
    const auto inj = inject_answer(rng, 1);
    LabeledExample ex;
    ex.post = make_post("q" + std::to_string(i), "t", inj.context, inj.answer);
    ex.span = {inj.starts[0], inj.starts[0] + inj.core_length, 0.8, SpanMethod::fuzzy,
               SpanStatus::needs_review, std::nullopt};
    truth.push_back({inj.starts[0], inj.starts[0] + inj.core_length});
    examples.push_back(std::move(ex));
  }
  for (std::size_t i = 0, n = rng.below(4); i < n; ++i) {
    const auto inj = inject_answer(rng, 1);
    examples.push_back(
        label_example(make_post("a" + std::to_string(i), "t", inj.context, inj.answer), {}));
  }
  for (std::size_t i = 0, n = rng.below(3); i < n; ++i) {
    examples.push_back(
        label_example(make_post("x" + std::to_string(i), "t", "alpha beta", "omega psi"), {}));
  }
  return examples;
}

ReviewDecision random_decision(Rng& rng, const std::vector<CharRange>& truth) {
  ReviewDecision d;
  d.reviewer = rng.chance(0.5) ? "ann" : "bo";
  const std::size_t k = rng.below(truth.size() + 1);
  d.example_id = k == truth.size() ? (rng.chance(0.5) ? "a0" : "ghost") : "q" + std::to_string(k);
  switch (rng.below(3)) {
    case 0: d.action = ReviewAction::accept; break;
    case 1: d.action = ReviewAction::reject; break;
    default:
      d.action = ReviewAction::adjust;
      if (k < truth.size()) {
        const CharRange t = truth[k];
        d.adjusted_span = rng.chance(0.2) ? CharRange{t.end, t.start} : t;
      } else {
        d.adjusted_span = CharRange{0, 1};
      }
  }
  return d;
}

std::string review_log() {
  Rng rng(1006);
  for (int seq = 0; seq < 100; ++seq) {
    std::vector<CharRange> truth;
    const auto examples = review_fixture(rng, truth);
    TempDir dir;
    const auto log = dir / "decisions.jsonl";

    // Reference: a store that never touches disk.
    ReviewStore reference(examples);
    std::vector<ReviewQueueState> after;  // state after each logged line
    {
      ReviewService svc(examples, log);
      for (std::size_t i = 0, n = rng.between(1, 30); i < n; ++i) {
        ReviewDecision d = random_decision(rng, truth);
        try {
          const ReviewDecision stored = svc.record(d);
          reference.apply(reference.validate(stored));
          after.push_back(reference.state());
        } catch (const ValidationError&) {
          // Refused decisions must leave no trace.
        }
        require(svc.state() == reference.state(), "live state diverged, sequence " +
                                                       std::to_string(seq));
      }
    }
    const std::string bytes = read_file(log);
    const auto lines = split_lines(bytes);
    require(lines.size() == after.size(), "log holds refused decisions");

    // A crash after any whole record replays to the state at that point.
    std::size_t offset = 0;
    for (std::size_t k = 0; k <= after.size(); ++k) {
      write_file(log, bytes.substr(0, offset));
      ReviewService replayed(examples, log);
      const ReviewQueueState want = k == 0 ? ReviewStore(examples).state() : after[k - 1];
      require(replayed.state() == want, "replay of prefix " + std::to_string(k) +
                                            " diverged, sequence " + std::to_string(seq));
      if (k < after.size()) offset += lines[k].size() + 1;
    }
    // A torn final record is reported, never silently dropped.
    if (!after.empty()) {
      write_file(log, bytes.substr(0, bytes.size() - 2));
      bool refused = false;
      try {
        ReviewService torn(examples, log);
      } catch (const ValidationError&) {
        refused = true;
      }
      require(refused, "torn log accepted, sequence " + std::to_string(seq));
    }

    // Export gate over the full log.
    write_file(log, bytes);
    const auto reviewed = apply_decisions(examples, DecisionLog::read(log));
    DataSplit split;
    std::set<std::string> want;
    for (const auto& ex : reviewed) {
      split.train.push_back(ex.post.id);
      const bool automatic = ex.span.status == SpanStatus::auto_accepted && !ex.review;
      const bool approved = ex.review && (ex.review->action == ReviewAction::accept ||
                                          ex.review->action == ReviewAction::adjust);
      if (automatic || approved) want.insert(ex.post.id);
    }
    std::set<std::string> got;
    for (const auto& r : extractive_records(reviewed, split, SplitPart::train, {false, true})) {
      got.insert(r.id);
      const auto it = std::find_if(reviewed.begin(), reviewed.end(),
                                   [&](const auto& e) { return e.post.id == r.id; });
      require(r.answer_start == it->effective_range().start, "export ignores adjusted span");
    }
    require(got == want, "export gate mismatch, sequence " + std::to_string(seq));
    const bool pending = !reference.state().pending.empty();
    bool threw = false;
    try {
      extractive_records(reviewed, split, SplitPart::train);
    } catch (const ValidationError&) {
      threw = true;
    }
    require(threw == pending, "pending review did not block the export");
  }
  return "100 random sequences, every prefix replayed; gate exact";
}

}  // namespace
}  // namespace spoilkit

int main() {
  using spoilkit::Check;
  const std::vector<std::pair<const char*, Check>> checks = {
      {"rouge-oracle-equivalence", spoilkit::rouge_oracle},
      {"metric-fixtures", spoilkit::metric_fixtures},
      {"semantic-metric-reduction", spoilkit::semantic_reduction},
      {"span-labeler-recovery", spoilkit::span_recovery},
      {"fuzzy-oracle", spoilkit::fuzzy_oracle},
      {"split-contract", spoilkit::split_contract},
      {"end-to-end-ceiling-floor", spoilkit::end_to_end},
      {"export-self-consistency", spoilkit::export_consistency},
      {"review-log-replay-and-gate", spoilkit::review_log},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    try {
      const std::string detail = check();
      std::printf("PASS  %-28s %s\n", name, detail.c_str());
    } catch (const spoilkit::Failed& f) {
      ++failures;
      std::printf("FAIL  %-28s %s\n", name, f.why.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  %-28s exception: %s\n", name, e.what());
    }
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failures);
  return failures == 0 ? 0 : 1;
}
