#include "spoilkit/cleaner.hpp"

#include <unicode/regex.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <set>

#include "spoilkit/errors.hpp"
#include "spoilkit/text.hpp"

namespace spoilkit {

struct Rule::Compiled {
  std::unique_ptr<icu::RegexPattern> pattern;
};

namespace {

icu::UnicodeString to_ustr(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string from_ustr(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Trims whitespace and dangling '|' separators left behind by stripping.
std::string tidy(std::string_view s) {
  std::u32string cps = text::to_u32(text::collapse_spaces(s));
  std::size_t b = 0;
  std::size_t e = cps.size();
  auto junk = [](char32_t c) { return c == U'|' || text::is_space(c); };
  while (b < e && junk(cps[b])) ++b;
  while (e > b && junk(cps[e - 1])) --e;
  return text::to_utf8(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace

Rule::Rule(std::string name, std::string pattern)
    : name_(std::move(name)), pattern_(std::move(pattern)) {
  UErrorCode status = U_ZERO_ERROR;
  UParseError perr;
  auto c = std::make_shared<Compiled>();
  c->pattern.reset(icu::RegexPattern::compile(to_ustr(pattern_), UREGEX_CASE_INSENSITIVE,
                                              perr, status));
  if (U_FAILURE(status) || !c->pattern) {
    throw ValidationError("rule '" + name_ + "': invalid pattern (" + u_errorName(status) +
                          ")");
  }
  compiled_ = std::move(c);
}

bool Rule::matches(std::string_view text) const {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString input = to_ustr(text);
  std::unique_ptr<icu::RegexMatcher> m(compiled_->pattern->matcher(input, status));
  if (U_FAILURE(status)) throw std::runtime_error("regex matcher failed");
  return m->find(0, status) && U_SUCCESS(status);
}

std::optional<std::string> Rule::remove_all(std::string_view text) const {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString input = to_ustr(text);
  std::unique_ptr<icu::RegexMatcher> m(compiled_->pattern->matcher(input, status));
  if (U_FAILURE(status)) throw std::runtime_error("regex matcher failed");
  if (!m->find(0, status)) return std::nullopt;
  m->reset();
  icu::UnicodeString out = m->replaceAll(icu::UnicodeString(), status);
  if (U_FAILURE(status)) throw std::runtime_error("regex replace failed");
  return from_ustr(out);
}

RuleSet RuleSet::parse(std::string_view config) {
  RuleSet rules;
  std::vector<Rule>* section = nullptr;
  std::set<std::string> names;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ValidationError("rules line " + std::to_string(line_no) + ": " + msg);
  };
  for (const auto& raw : split_lines(config)) {
    ++line_no;
    const std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const std::string name = line.substr(1, line.size() - 2);
      if (name == "strip") section = &rules.strip_patterns;
      else if (name == "toxic") section = &rules.toxic_patterns;
      else if (name == "opinion") section = &rules.opinion_patterns;
      else fail("unknown section [" + name + "]");
      names.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected `name = pattern`");
    const std::string key = text::trim(std::string_view(line).substr(0, eq));
    const std::string value = text::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail("empty rule name");
    if (section == nullptr) {
      if (key != "version") fail("entry outside a section: " + key);
      try {
        rules.version = std::stoi(value);
      } catch (const std::exception&) {
        fail("bad version");
      }
      if (rules.version != 1) fail("unsupported rules version " + value);
      continue;
    }
    if (value.empty()) fail("empty pattern for '" + key + "'");
    if (!names.insert(key).second) fail("duplicate rule '" + key + "'");
    try {
      section->emplace_back(key, value);
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }
  return rules;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string_view RuleSet::default_config_text() {
  static constexpr std::string_view kText =
#include "default_rules.inc"
      ;
  return kText;
}

RuleSet RuleSet::defaults() { return parse(default_config_text()); }

std::string_view to_string(CleaningAction a) {
  switch (a) {
    case CleaningAction::kept: return "kept";
    case CleaningAction::rewritten: return "rewritten";
    case CleaningAction::flagged_toxic: return "flagged_toxic";
    case CleaningAction::flagged_opinion: return "flagged_opinion";
    case CleaningAction::dropped: return "dropped";
  }
  return "kept";
}

Json CleaningOutcome::to_json() const {
  Json j = {{"post_id", post_id}, {"action", to_string(action)}};
  if (rewritten_answer) j["rewritten_answer"] = *rewritten_answer;
  if (!matched_rule.empty()) j["matched_rule"] = matched_rule;
  return j;
}

CleanedAnswer clean_answer(std::string_view answer, const RuleSet& rules) {
  std::string current(answer);
  std::vector<std::string> fired;
  // Repeat until no rule fires so that cleaning is idempotent even when one
  // removal exposes another match.
  for (int pass = 0; pass < 16; ++pass) {
    bool changed = false;
    for (const auto& rule : rules.strip_patterns) {
      if (auto stripped = rule.remove_all(current)) {
        if (std::find(fired.begin(), fired.end(), rule.name()) == fired.end()) {
          fired.push_back(rule.name());
        }
        std::string next = tidy(*stripped);
        if (next != current) {
          current = std::move(next);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  CleanedAnswer result;
  std::string joined;
  for (const auto& f : fired) {
    if (!joined.empty()) joined.push_back(',');
    joined += f;
  }
  if (current.empty()) {
    result.outcome.action = CleaningAction::dropped;
    result.outcome.matched_rule = joined;
  } else if (current != answer) {
    result.outcome.action = CleaningAction::rewritten;
    result.outcome.rewritten_answer = current;
    result.outcome.matched_rule = joined;
  }
  result.cleaned = std::move(current);
  return result;
}

CleaningOutcome flag_noise(std::string_view answer, const RuleSet& rules) {
  CleaningOutcome out;
  for (const auto& rule : rules.toxic_patterns) {
    if (rule.matches(answer)) {
      out.action = CleaningAction::flagged_toxic;
      out.matched_rule = rule.name();
      return out;
    }
  }
  for (const auto& rule : rules.opinion_patterns) {
    if (rule.matches(answer)) {
      out.action = CleaningAction::flagged_opinion;
      out.matched_rule = rule.name();
      return out;
    }
  }
  return out;
}

CleanReport clean_corpus(const Corpus& corpus, const RuleSet& rules) {
  CleanReport report;
  std::vector<ClickbaitPost> kept;
  std::size_t flagged = 0;
  for (const auto& post : corpus.posts()) {
    CleanedAnswer cleaned = clean_answer(post.answer, rules);
    CleaningOutcome outcome = std::move(cleaned.outcome);
    outcome.post_id = post.id;
    if (outcome.action == CleaningAction::dropped) {
      report.outcomes.push_back(std::move(outcome));
      continue;
    }
    ClickbaitPost out = post;
    out.answer = cleaned.cleaned;
    out.noise_flag = NoiseFlag::none;
    const CleaningOutcome noise = flag_noise(out.answer, rules);
    if (noise.action != CleaningAction::kept) {
      ++flagged;
      out.noise_flag = noise.action == CleaningAction::flagged_toxic ? NoiseFlag::toxic
                                                                     : NoiseFlag::opinion;
      outcome.action = noise.action;
      outcome.matched_rule = outcome.matched_rule.empty()
                                 ? noise.matched_rule
                                 : outcome.matched_rule + "," + noise.matched_rule;
    }
    report.outcomes.push_back(std::move(outcome));
    kept.push_back(std::move(out));
  }
  report.flagged_fraction =
      corpus.size() == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(corpus.size());
  report.corpus = Corpus(std::move(kept), corpus.stats().drop_reasons);
  return report;
}

std::string serialize_outcomes(const std::vector<CleaningOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    out += canonical_json(o.to_json());
    out.push_back('\n');
  }
  return out;
}

}  // namespace spoilkit
