#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoilkit/corpus.hpp"

namespace spoilkit {

// A named, compiled, case-insensitive pattern.
class Rule {
 public:
  Rule(std::string name, std::string pattern);

  const std::string& name() const { return name_; }
  const std::string& pattern() const { return pattern_; }

  bool matches(std::string_view text) const;
  // Returns the text with all matches removed, or nullopt if none matched.
  std::optional<std::string> remove_all(std::string_view text) const;

 private:
  struct Compiled;
  std::string name_;
  std::string pattern_;
  std::shared_ptr<const Compiled> compiled_;
};

struct RuleSet {
  int version = 1;
  std::vector<Rule> strip_patterns;
  std::vector<Rule> toxic_patterns;
  std::vector<Rule> opinion_patterns;

  bool empty() const {
    return strip_patterns.empty() && toxic_patterns.empty() && opinion_patterns.empty();
  }

  // Parses the sectioned `name = pattern` config format. Throws
  // ValidationError with the offending line number.
  static RuleSet parse(std::string_view config);
  static RuleSet load(const std::filesystem::path& path);
  // The rule file shipped in config/default_rules.txt.
  static RuleSet defaults();
  static std::string_view default_config_text();
};

enum class CleaningAction { kept, rewritten, flagged_toxic, flagged_opinion, dropped };

std::string_view to_string(CleaningAction a);

struct CleaningOutcome {
  std::string post_id;
  CleaningAction action = CleaningAction::kept;
  std::optional<std::string> rewritten_answer;
  // Comma-separated names of every rule that fired; empty iff kept.
  std::string matched_rule;

  Json to_json() const;
};

struct CleanedAnswer {
  std::string cleaned;
  CleaningOutcome outcome;  // kept, rewritten or dropped
};

CleanedAnswer clean_answer(std::string_view answer, const RuleSet& rules);

// Case-insensitive toxic/opinion check; toxic takes precedence.
CleaningOutcome flag_noise(std::string_view answer, const RuleSet& rules);

struct CleanReport {
  Corpus corpus;
  std::vector<CleaningOutcome> outcomes;  // one per input post, input order
  double flagged_fraction = 0.0;          // flagged / input count
};

CleanReport clean_corpus(const Corpus& corpus, const RuleSet& rules);

std::string serialize_outcomes(const std::vector<CleaningOutcome>& outcomes);

}  // namespace spoilkit
