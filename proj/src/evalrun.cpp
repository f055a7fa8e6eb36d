#include "spoilkit/evalrun.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>

#include "spoilkit/corpus.hpp"
#include "spoilkit/errors.hpp"
#include "spoilkit/text.hpp"

namespace spoilkit {

PredictionSet PredictionSet::parse(std::string_view content, std::string model_name) {
  PredictionSet set;
  set.model_name = std::move(model_name);
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string where = "predictions line " + std::to_string(i + 1);
    const Json j = parse_json(lines[i], where);
    std::string id;
    std::string prediction;
    try {
      id = j.at("id").get<std::string>();
      const Json& p = j.at("prediction");
      prediction = p.is_null() ? std::string() : p.get<std::string>();
    } catch (const Json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!set.predictions.emplace(id, std::move(prediction)).second) {
      throw ValidationError(where + ": duplicate id '" + id + "'");
    }
  }
  return set;
}

PredictionSet PredictionSet::load(const std::filesystem::path& path, std::string model_name) {
  return parse(read_file(path), std::move(model_name));
}

std::vector<Reference> references_for(const std::vector<LabeledExample>& examples,
                                      const DataSplit& split, SplitPart part,
                                      bool include_flagged) {
  std::vector<Reference> refs;
  for (const LabeledExample* ex : select_part(examples, split, part, include_flagged)) {
    refs.push_back({ex->post.id, ex->post.answer});
  }
  return refs;
}

ExampleScores score_example(std::string_view prediction, std::string_view reference,
                            const EmbeddingProvider* provider) {
  const TokenSeq cand = tokenize(prediction);
  const TokenSeq ref = tokenize(reference);
  ExampleScores s;
  if (provider) s.semantic = MetricTriple{};
  if (cand.empty() || ref.empty()) return s;
  s.rouge1 = rouge_n(cand, ref, 1);
  s.rouge2 = rouge_n(cand, ref, 2);
  s.rougeL = rouge_l(cand, ref);
  if (provider) s.semantic = semantic_score(cand, ref, *provider);
  return s;
}

EvalRow evaluate(const PredictionSet& predictions, const std::vector<Reference>& references,
                 const EmbeddingProvider* provider) {
  if (references.empty()) throw ValidationError("evaluate: no reference examples");
  std::vector<MetricTriple> r1, r2, rl, sem;
  for (const auto& ref : references) {
    auto it = predictions.predictions.find(ref.id);
    if (it == predictions.predictions.end()) {
      throw ValidationError("model '" + predictions.model_name + "' has no prediction for '" +
                            ref.id + "'");
    }
    const ExampleScores s = score_example(it->second, ref.answer, provider);
    r1.push_back(s.rouge1);
    r2.push_back(s.rouge2);
    rl.push_back(s.rougeL);
    if (s.semantic) sem.push_back(*s.semantic);
  }
  EvalRow row{predictions.model_name, aggregate(r1), aggregate(r2), aggregate(rl), std::nullopt};
  if (provider) row.semantic = aggregate(sem);
  return row;
}

namespace {

Json triple_json(const MetricTriple& t) {
  return {{"precision", t.precision}, {"recall", t.recall}, {"f1", t.f1}};
}

MetricTriple triple_from_json(const Json& j) {
  MetricTriple t{j.at("precision").get<double>(), j.at("recall").get<double>(),
                 j.at("f1").get<double>()};
  for (double v : {t.precision, t.recall, t.f1}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("metric value outside [0, 1]");
  }
  return t;
}

}  // namespace

Json EvalReport::to_json() const {
  Json jrows = Json::array();
  for (const auto& r : rows) {
    jrows.push_back({{"model", r.model},
                     {"rouge1", triple_json(r.rouge1)},
                     {"rouge2", triple_json(r.rouge2)},
                     {"rougeL", triple_json(r.rougeL)},
                     {"semantic", r.semantic ? triple_json(*r.semantic) : Json(nullptr)}});
  }
  return {{"split", split_id}, {"example_count", example_count}, {"rows", jrows}};
}

EvalReport EvalReport::from_json(const Json& j) {
  EvalReport rep;
  try {
    rep.split_id = j.at("split").get<std::string>();
    rep.example_count = j.at("example_count").get<std::size_t>();
    for (const auto& r : j.at("rows")) {
      EvalRow row;
      row.model = r.at("model").get<std::string>();
      row.rouge1 = triple_from_json(r.at("rouge1"));
      row.rouge2 = triple_from_json(r.at("rouge2"));
      row.rougeL = triple_from_json(r.at("rougeL"));
      if (r.contains("semantic") && !r["semantic"].is_null()) {
        row.semantic = triple_from_json(r["semantic"]);
      }
      rep.rows.push_back(std::move(row));
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad eval result: ") + e.what());
  }
  if (rep.example_count == 0) throw ValidationError("eval result has no examples");
  return rep;
}

EvalReport EvalReport::load(const std::filesystem::path& path) {
  return from_json(parse_json(read_file(path), path.string()));
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "text" || s == "text_table" || s == "table") return ReportFormat::text_table;
  if (s == "csv") return ReportFormat::csv;
  if (s == "jsonl") return ReportFormat::jsonl;
  throw ValidationError("unknown report format '" + std::string(s) + "'");
}

namespace {

constexpr std::array<std::string_view, 12> kCsvColumns = {
    "rouge1_p", "rouge1_r", "rouge1_f", "rouge2_p",   "rouge2_r",   "rouge2_f",
    "rougeL_p", "rougeL_r", "rougeL_f", "semantic_p", "semantic_r", "semantic_f"};

constexpr std::array<std::string_view, 12> kTableColumns = {
    "R1-P", "R1-R", "R1-F", "R2-P", "R2-R", "R2-F", "RL-P", "RL-R", "RL-F", "S-P", "S-R", "S-F"};

constexpr std::string_view kMissing = "n/a";

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string pad_right(const std::string& s, std::size_t width) {
  const std::size_t len = text::length_cp(s);
  return len >= width ? s : s + std::string(width - len, ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

double parse_percent(const std::string& cell) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ValidationError("bad report cell '" + cell + "'");
  }
  return v / 100.0;
}

}  // namespace

std::vector<std::string> format_cells(const EvalRow& row) {
  std::vector<std::string> cells;
  for (const MetricTriple* t : {&row.rouge1, &row.rouge2, &row.rougeL}) {
    cells.push_back(percent(t->precision));
    cells.push_back(percent(t->recall));
    cells.push_back(percent(t->f1));
  }
  for (int i = 0; i < 3; ++i) {
    if (!row.semantic) {
      cells.emplace_back(kMissing);
    } else {
      const double v = i == 0 ? row.semantic->precision
                              : i == 1 ? row.semantic->recall : row.semantic->f1;
      cells.push_back(percent(v));
    }
  }
  return cells;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  std::string out;
  switch (format) {
    case ReportFormat::text_table: {
      std::size_t name_width = 5;
      for (const auto& r : report.rows) name_width = std::max(name_width, text::length_cp(r.model));
      out += "split: " + report.split_id + "  examples: " + std::to_string(report.example_count) +
             "\n";
      out += pad_right("model", name_width);
      for (auto c : kTableColumns) out += "  " + pad_left(std::string(c), 6);
      out += "\n";
      for (const auto& r : report.rows) {
        out += pad_right(r.model, name_width);
        for (const auto& cell : format_cells(r)) out += "  " + pad_left(cell, 6);
        out += "\n";
      }
      break;
    }
    case ReportFormat::csv: {
      out += "model";
      for (auto c : kCsvColumns) out += "," + std::string(c);
      out += "\n";
      for (const auto& r : report.rows) {
        out += csv_field(r.model);
        for (const auto& cell : format_cells(r)) out += "," + cell;
        out += "\n";
      }
      break;
    }
    case ReportFormat::jsonl: {
      for (const auto& r : report.rows) {
        Json j = {{"model", r.model},
                  {"split", report.split_id},
                  {"example_count", report.example_count}};
        const auto cells = format_cells(r);
        for (std::size_t i = 0; i < cells.size(); ++i) {
          j[std::string(kCsvColumns[i])] =
              cells[i] == kMissing ? Json(nullptr) : Json(std::stod(cells[i]));
        }
        out += canonical_json(j) + "\n";
      }
      break;
    }
  }
  return out;
}

std::vector<EvalRow> parse_report_csv(std::string_view content) {
  const auto records = parse_csv(content);
  if (records.empty()) throw ValidationError("report csv: missing header");
  const auto& header = records.front();
  if (header.size() != 13 || header[0] != "model" ||
      !std::equal(kCsvColumns.begin(), kCsvColumns.end(), header.begin() + 1)) {
    throw ValidationError("report csv: unexpected header");
  }
  std::vector<EvalRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 13) {
      throw ValidationError("report csv: row " + std::to_string(i + 1) + " has " +
                            std::to_string(rec.size()) + " fields");
    }
    EvalRow row;
    row.model = rec[0];
    auto triple = [&](std::size_t at) {
      return MetricTriple{parse_percent(rec[at]), parse_percent(rec[at + 1]),
                          parse_percent(rec[at + 2])};
    };
    row.rouge1 = triple(1);
    row.rouge2 = triple(4);
    row.rougeL = triple(7);
    const bool missing = rec[10] == kMissing && rec[11] == kMissing && rec[12] == kMissing;
    if (!missing) row.semantic = triple(10);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace spoilkit
