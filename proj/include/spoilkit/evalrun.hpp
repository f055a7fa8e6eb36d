#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoilkit/dataset.hpp"
#include "spoilkit/embedding.hpp"
#include "spoilkit/metrics.hpp"

namespace spoilkit {

struct PredictionSet {
  std::string model_name;
  std::map<std::string, std::string> predictions;  // id -> predicted answer

  // JSONL {id, prediction}. Duplicate ids are a ValidationError.
  static PredictionSet parse(std::string_view content, std::string model_name);
  static PredictionSet load(const std::filesystem::path& path, std::string model_name);
};

struct Reference {
  std::string id;
  std::string answer;
};

// Reference answers of one split part, in split order.
std::vector<Reference> references_for(const std::vector<LabeledExample>& examples,
                                      const DataSplit& split, SplitPart part,
                                      bool include_flagged = false);

struct ExampleScores {
  MetricTriple rouge1;
  MetricTriple rouge2;
  MetricTriple rougeL;
  std::optional<MetricTriple> semantic;  // set iff a provider was given
};

// A prediction or reference without tokens scores 0 everywhere.
ExampleScores score_example(std::string_view prediction, std::string_view reference,
                            const EmbeddingProvider* provider);

struct EvalRow {
  std::string model;
  MetricTriple rouge1;
  MetricTriple rouge2;
  MetricTriple rougeL;
  std::optional<MetricTriple> semantic;

  bool operator==(const EvalRow&) const = default;
};

// Macro means over `references`. Throws ValidationError when a reference id
// has no prediction or there are no references. Extra predictions are
// ignored.
EvalRow evaluate(const PredictionSet& predictions, const std::vector<Reference>& references,
                 const EmbeddingProvider* provider = nullptr);

// Raw scores in [0, 1]; rendering scales them.
struct EvalReport {
  std::vector<EvalRow> rows;
  std::string split_id;
  std::size_t example_count = 0;

  bool operator==(const EvalReport&) const = default;

  Json to_json() const;
  static EvalReport from_json(const Json& j);
  static EvalReport load(const std::filesystem::path& path);
};

enum class ReportFormat { text_table, csv, jsonl };

ReportFormat parse_report_format(std::string_view s);

// Twelve columns per row: ROUGE-1, ROUGE-2, ROUGE-L, semantic, each P/R/F,
// as percentages with two decimals. A missing semantic triple renders
// "n/a" (null in jsonl).
std::string render_report(const EvalReport& report, ReportFormat format);

// Inverse of the csv rendering, values divided back into [0, 1].
std::vector<EvalRow> parse_report_csv(std::string_view content);

// The twelve formatted cells for a row, in column order.
std::vector<std::string> format_cells(const EvalRow& row);

}  // namespace spoilkit
