#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spoilkit/spanlab.hpp"

namespace spoilkit {

enum class TitleTagKind { list_style, vague, question_form };

std::string_view to_string(TitleTagKind k);

struct TitleTag {
  std::string post_id;
  std::set<TitleTagKind> tags;

  bool has(TitleTagKind k) const { return tags.count(k) != 0; }
};

// list_style: leading number, "top N", or "N reasons/things/ways/...".
// question_form: ends with '?' or opens with an interrogative word.
// vague: at most 6 tokens and no number. Throws ValidationError on an empty
// title.
TitleTag tag_title(std::string_view title);

enum class SplitPart { train, validation, test };

std::string_view to_string(SplitPart p);
SplitPart parse_split_part(std::string_view s);

struct PartSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// test = floor(n/10), train = ceil(8n/10), validation takes the rest.
PartSizes split_sizes(std::size_t n);

struct DataSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  const std::vector<std::string>& part(SplitPart p) const;

  Json to_json() const;
  static DataSplit from_json(const Json& j);
  static DataSplit load(const std::filesystem::path& path);
};

// Seeded shuffle within each source stratum, then an 8/1/1 cut per stratum.
// Strata under 10 examples are pooled together (with a warning). The result
// depends only on the set of ids, their sources and the seed.
DataSplit split_corpus(const std::vector<LabeledExample>& examples, std::uint64_t seed);

struct ExportOptions {
  bool include_flagged = false;   // keep cleaner-flagged posts
  bool skip_unreviewed = false;   // skip needs_review instead of failing
};

// One SQuAD-style question with its single answer.
struct ExtractiveRecord {
  std::string id;
  std::string question;
  std::string context;
  std::string answer_text;
  std::size_t answer_start = 0;  // code points

  bool operator==(const ExtractiveRecord&) const = default;
};

// Examples of `part` that go into an extractive file, in split order.
// Throws ValidationError when a selected example still awaits review.
std::vector<ExtractiveRecord> extractive_records(const std::vector<LabeledExample>& examples,
                                                 const DataSplit& split, SplitPart part,
                                                 const ExportOptions& opts = {});

// SQuAD-v2-style document, canonical serialization with trailing newline.
std::string write_extractive(const std::vector<ExtractiveRecord>& records);
std::vector<ExtractiveRecord> parse_extractive(std::string_view content);

std::string export_extractive(const std::vector<LabeledExample>& examples,
                              const DataSplit& split, SplitPart part,
                              const ExportOptions& opts = {});

// JSONL {answer, context, id, question}; span status is irrelevant.
std::string export_abstractive(const std::vector<LabeledExample>& examples,
                               const DataSplit& split, SplitPart part,
                               const ExportOptions& opts = {});

// JSONL {id, prediction: ""} for external model runners.
std::string export_predictions_template(const std::vector<LabeledExample>& examples,
                                        const DataSplit& split, SplitPart part,
                                        const ExportOptions& opts = {});

// Examples of `part` in split order, minus flagged ones unless included.
std::vector<const LabeledExample*> select_part(const std::vector<LabeledExample>& examples,
                                               const DataSplit& split, SplitPart part,
                                               bool include_flagged);

}  // namespace spoilkit
