#include "spoilkit/dataset.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <unordered_map>

#include "spoilkit/errors.hpp"
#include "spoilkit/text.hpp"

namespace spoilkit {

std::string_view to_string(TitleTagKind k) {
  switch (k) {
    case TitleTagKind::list_style: return "list_style";
    case TitleTagKind::vague: return "vague";
    case TitleTagKind::question_form: return "question_form";
  }
  return "vague";
}

namespace {

bool all_digits(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool has_digit(std::string_view t) {
  return std::any_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

constexpr std::array<std::string_view, 19> kListNouns = {
    "reasons", "things", "ways",    "tips",   "facts",    "signs",  "secrets",
    "tricks",  "steps",  "mistakes", "habits", "lessons", "rules",  "questions",
    "foods",   "places", "people",  "times",  "examples"};

constexpr std::array<std::string_view, 9> kInterrogatives = {
    "what", "why", "how", "who", "whom", "whose", "when", "where", "which"};

constexpr std::array<std::string_view, 26> kNumberWords = {
    "zero",     "one",     "two",      "three",   "four",     "five",    "six",
    "seven",    "eight",   "nine",     "ten",     "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty",
    "hundred",  "thousand", "million", "billion", "dozen"};

template <std::size_t N>
bool in(const std::array<std::string_view, N>& set, std::string_view v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

}  // namespace

TitleTag tag_title(std::string_view title) {
  const std::string trimmed = text::trim(title);
  if (trimmed.empty()) throw ValidationError("tag_title: empty title");
  const auto tokens = tokenize(trimmed).tokens;
  TitleTag tag;

  bool list = !tokens.empty() && all_digits(tokens.front());
  for (std::size_t i = 0; i + 1 < tokens.size() && !list; ++i) {
    if (tokens[i] == "top" && all_digits(tokens[i + 1])) list = true;
    if (all_digits(tokens[i]) && in(kListNouns, tokens[i + 1])) list = true;
  }
  if (list) tag.tags.insert(TitleTagKind::list_style);

  if (trimmed.back() == '?' || (!tokens.empty() && in(kInterrogatives, tokens.front()))) {
    tag.tags.insert(TitleTagKind::question_form);
  }

  const bool quantity = std::any_of(tokens.begin(), tokens.end(), [](const std::string& t) {
    return has_digit(t) || in(kNumberWords, t);
  });
  if (tokens.size() <= 6 && !quantity) tag.tags.insert(TitleTagKind::vague);
  return tag;
}

std::string_view to_string(SplitPart p) {
  switch (p) {
    case SplitPart::train: return "train";
    case SplitPart::validation: return "validation";
    case SplitPart::test: return "test";
  }
  return "train";
}

SplitPart parse_split_part(std::string_view s) {
  if (s == "train") return SplitPart::train;
  if (s == "validation") return SplitPart::validation;
  if (s == "test") return SplitPart::test;
  throw ValidationError("unknown split part '" + std::string(s) + "'");
}

PartSizes split_sizes(std::size_t n) {
  PartSizes s;
  s.test = n / 10;
  s.train = (8 * n + 9) / 10;
  s.validation = n - s.train - s.test;
  return s;
}

const std::vector<std::string>& DataSplit::part(SplitPart p) const {
  switch (p) {
    case SplitPart::train: return train;
    case SplitPart::validation: return validation;
    case SplitPart::test: return test;
  }
  return train;
}

Json DataSplit::to_json() const {
  return {{"seed", seed},
          {"train", train},
          {"validation", validation},
          {"test", test},
          {"warnings", warnings}};
}

DataSplit DataSplit::from_json(const Json& j) {
  DataSplit s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad split file: ") + e.what());
  }
  return s;
}

DataSplit DataSplit::load(const std::filesystem::path& path) {
  return from_json(parse_json(read_file(path), path.string()));
}

namespace {

// Uniform draw in [0, bound) without modulo bias; std distributions are not
// reproducible across standard libraries.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

void seeded_shuffle(std::vector<std::string>& ids, std::uint64_t seed, std::string_view stratum) {
  const std::uint64_t tag = text::fnv1a64(stratum);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  std::mt19937_64 rng(seq);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(draw_below(rng, i));
    std::swap(ids[i - 1], ids[j]);
  }
}

}  // namespace

DataSplit split_corpus(const std::vector<LabeledExample>& examples, std::uint64_t seed) {
  if (examples.empty()) throw ValidationError("split_corpus: no examples");
  std::map<Source, std::vector<std::string>> strata;
  for (const auto& ex : examples) strata[ex.post.source].push_back(ex.post.id);

  DataSplit split;
  split.seed = seed;
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  std::vector<std::string> pooled;
  for (auto& [source, ids] : strata) {
    if (ids.size() < 10) {
      split.warnings.push_back("source '" + std::string(to_string(source)) + "' has only " +
                               std::to_string(ids.size()) +
                               " examples; pooled into the global stratum");
      pooled.insert(pooled.end(), ids.begin(), ids.end());
    } else {
      groups.emplace_back(std::string(to_string(source)), std::move(ids));
    }
  }
  if (!pooled.empty()) groups.emplace_back("pooled", std::move(pooled));

  for (auto& [name, ids] : groups) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw ValidationError("split_corpus: duplicate example id");
    }
    seeded_shuffle(ids, seed, name);
    const PartSizes sz = split_sizes(ids.size());
    auto it = ids.begin();
    split.train.insert(split.train.end(), it, it + static_cast<std::ptrdiff_t>(sz.train));
    it += static_cast<std::ptrdiff_t>(sz.train);
    split.validation.insert(split.validation.end(), it,
                            it + static_cast<std::ptrdiff_t>(sz.validation));
    it += static_cast<std::ptrdiff_t>(sz.validation);
    split.test.insert(split.test.end(), it, ids.end());
  }
  return split;
}

std::vector<const LabeledExample*> select_part(const std::vector<LabeledExample>& examples,
                                               const DataSplit& split, SplitPart part,
                                               bool include_flagged) {
  std::unordered_map<std::string_view, const LabeledExample*> by_id;
  for (const auto& ex : examples) by_id.emplace(ex.post.id, &ex);
  std::vector<const LabeledExample*> out;
  for (const auto& id : split.part(part)) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ValidationError("split references unknown example '" + id + "'");
    }
    if (!include_flagged && it->second->post.noise_flag != NoiseFlag::none) continue;
    out.push_back(it->second);
  }
  return out;
}

std::vector<ExtractiveRecord> extractive_records(const std::vector<LabeledExample>& examples,
                                                 const DataSplit& split, SplitPart part,
                                                 const ExportOptions& opts) {
  std::vector<ExtractiveRecord> records;
  for (const LabeledExample* ex : select_part(examples, split, part, opts.include_flagged)) {
    if (ex->excluded_from_extractive()) continue;
    if (!ex->extractive_ready()) {
      if (opts.skip_unreviewed) continue;
      throw ValidationError("example '" + ex->post.id +
                            "' has an unreviewed span; review it or pass --skip-unreviewed");
    }
    const CharRange r = ex->effective_range();
    records.push_back({ex->post.id, ex->post.question, ex->post.context,
                       text::slice_cp(ex->post.context, r.start, r.end), r.start});
  }
  return records;
}

std::string write_extractive(const std::vector<ExtractiveRecord>& records) {
  Json data = Json::array();
  for (const auto& r : records) {
    Json answer = Json::object();
    answer["answer_start"] = r.answer_start;
    answer["text"] = r.answer_text;
    Json qa = Json::object();
    qa["answers"] = Json::array();
    qa["answers"].push_back(std::move(answer));
    qa["id"] = r.id;
    qa["is_impossible"] = false;
    qa["question"] = r.question;
    Json paragraph = Json::object();
    paragraph["context"] = r.context;
    paragraph["qas"] = Json::array();
    paragraph["qas"].push_back(std::move(qa));
    Json entry = Json::object();
    entry["paragraphs"] = Json::array();
    entry["paragraphs"].push_back(std::move(paragraph));
    entry["title"] = r.id;
    data.push_back(std::move(entry));
  }
  const Json doc = {{"data", data}, {"version", "v2.0"}};
  return canonical_json(doc) + "\n";
}

std::vector<ExtractiveRecord> parse_extractive(std::string_view content) {
  const Json doc = parse_json(content, "extractive file");
  std::vector<ExtractiveRecord> out;
  try {
    for (const auto& article : doc.at("data")) {
      for (const auto& para : article.at("paragraphs")) {
        const std::string context = para.at("context").get<std::string>();
        for (const auto& qa : para.at("qas")) {
          ExtractiveRecord r;
          r.id = qa.at("id").get<std::string>();
          r.question = qa.at("question").get<std::string>();
          r.context = context;
          const auto& answer = qa.at("answers").at(0);
          r.answer_text = answer.at("text").get<std::string>();
          r.answer_start = answer.at("answer_start").get<std::size_t>();
          const std::size_t end = r.answer_start + text::length_cp(r.answer_text);
          if (text::slice_cp(context, r.answer_start, end) != r.answer_text) {
            throw ValidationError("extractive record '" + r.id +
                                  "': answer text does not match context slice");
          }
          out.push_back(std::move(r));
        }
      }
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad extractive file: ") + e.what());
  }
  return out;
}

std::string export_extractive(const std::vector<LabeledExample>& examples,
                              const DataSplit& split, SplitPart part,
                              const ExportOptions& opts) {
  return write_extractive(extractive_records(examples, split, part, opts));
}

std::string export_abstractive(const std::vector<LabeledExample>& examples,
                               const DataSplit& split, SplitPart part,
                               const ExportOptions& opts) {
  std::string out;
  for (const LabeledExample* ex : select_part(examples, split, part, opts.include_flagged)) {
    const Json j = {{"id", ex->post.id},
                    {"question", ex->post.question},
                    {"context", ex->post.context},
                    {"answer", ex->post.answer}};
    out += canonical_json(j);
    out.push_back('\n');
  }
  return out;
}

std::string export_predictions_template(const std::vector<LabeledExample>& examples,
                                        const DataSplit& split, SplitPart part,
                                        const ExportOptions& opts) {
  std::string out;
  for (const LabeledExample* ex : select_part(examples, split, part, opts.include_flagged)) {
    out += canonical_json(Json{{"id", ex->post.id}, {"prediction", ""}});
    out.push_back('\n');
  }
  return out;
}

}  // namespace spoilkit
