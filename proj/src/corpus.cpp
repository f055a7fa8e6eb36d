#include "spoilkit/corpus.hpp"

#include <cstdio>
#include <regex>
#include <set>

#include "spoilkit/errors.hpp"
#include "spoilkit/html.hpp"
#include "spoilkit/text.hpp"

namespace spoilkit {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::reddit: return "reddit";
    case Source::facebook: return "facebook";
    case Source::other: return "other";
  }
  return "other";
}

Source parse_source(std::string_view s) {
  if (s == "reddit") return Source::reddit;
  if (s == "facebook") return Source::facebook;
  if (s == "other") return Source::other;
  throw ValidationError("unknown source '" + std::string(s) + "'");
}

std::string_view to_string(NoiseFlag f) {
  switch (f) {
    case NoiseFlag::none: return "none";
    case NoiseFlag::toxic: return "toxic";
    case NoiseFlag::opinion: return "opinion";
  }
  return "none";
}

NoiseFlag parse_noise_flag(std::string_view s) {
  if (s == "none") return NoiseFlag::none;
  if (s == "toxic") return NoiseFlag::toxic;
  if (s == "opinion") return NoiseFlag::opinion;
  throw ValidationError("unknown noise flag '" + std::string(s) + "'");
}

DumpFormat parse_dump_format(std::string_view s) {
  if (s == "jsonl") return DumpFormat::jsonl;
  if (s == "csv") return DumpFormat::csv;
  throw ValidationError("unknown dump format '" + std::string(s) + "'");
}

Json to_json(const ClickbaitPost& post) {
  Json j = {{"id", post.id},
            {"source", to_string(post.source)},
            {"question", post.question},
            {"context", post.context},
            {"answer", post.answer}};
  if (post.url) j["url"] = *post.url;
  if (post.fetched_at) j["fetched_at"] = *post.fetched_at;
  if (post.noise_flag != NoiseFlag::none) j["noise_flag"] = to_string(post.noise_flag);
  return j;
}

ClickbaitPost post_from_json(const Json& j) {
  try {
    ClickbaitPost p;
    p.id = j.at("id").get<std::string>();
    p.source = parse_source(j.at("source").get<std::string>());
    p.question = j.at("question").get<std::string>();
    p.context = j.at("context").get<std::string>();
    p.answer = j.at("answer").get<std::string>();
    if (j.contains("url")) p.url = j["url"].get<std::string>();
    if (j.contains("fetched_at")) p.fetched_at = j["fetched_at"].get<std::string>();
    if (j.contains("noise_flag")) {
      p.noise_flag = parse_noise_flag(j["noise_flag"].get<std::string>());
    }
    return p;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad post record: ") + e.what());
  }
}

Json CorpusStats::to_json() const {
  Json per_source = Json::object();
  for (const auto& [src, n] : per_source_counts) per_source[std::string(to_string(src))] = n;
  return {{"count", count},
          {"per_source_counts", per_source},
          {"dropped_count", dropped_count},
          {"drop_reasons", drop_reasons}};
}

Corpus::Corpus(std::vector<ClickbaitPost> posts,
               std::map<std::string, std::size_t> drop_reasons)
    : posts_(std::move(posts)) {
  std::set<std::string_view> ids;
  for (const auto& p : posts_) {
    if (p.id.empty()) throw ValidationError("post with empty id");
    if (!ids.insert(p.id).second) throw ValidationError("duplicate post id '" + p.id + "'");
    if (p.question.empty() || p.context.empty() || p.answer.empty()) {
      throw ValidationError("post '" + p.id + "' has an empty required field");
    }
    ++stats_.per_source_counts[p.source];
  }
  stats_.count = posts_.size();
  for (const auto& [reason, n] : drop_reasons) stats_.dropped_count += n;
  stats_.drop_reasons = std::move(drop_reasons);
}

const ClickbaitPost* Corpus::find(std::string_view id) const {
  for (const auto& p : posts_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::string normalize_context(std::string_view raw) {
  std::string current = extract_article_text(text::nfkc(raw));
  for (int pass = 0; pass < 16; ++pass) {
    std::string next = extract_article_text(text::nfkc(current));
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

namespace {

// One raw record before validation. Absent fields are nullopt.
struct RawRecord {
  std::optional<std::string> id, title, article, answer, url, fetched_at;
};

std::string normalize_line(std::string_view s) {
  return text::collapse_spaces(text::nfkc(s));
}

std::string content_hash_id(Source source, const ClickbaitPost& p) {
  std::string key(to_string(source));
  for (const std::string* f : {&p.question, &p.context, &p.answer}) {
    key.push_back('\x1f');
    key += *f;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "h%016llx",
                static_cast<unsigned long long>(text::fnv1a64(key)));
  return buf;
}

bool valid_timestamp(const std::string& ts) {
  static const std::regex re(R"(^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d{1,9})?Z$)");
  return std::regex_match(ts, re);
}

class CorpusBuilder {
 public:
  explicit CorpusBuilder(const IngestOptions& opts) : opts_(opts) {}

  void drop(const std::string& reason) { ++drops_[reason]; }

  void add(RawRecord r) {
    if (!r.title) return drop("missing_title");
    if (!r.article) return drop("missing_article");
    if (opts_.split_delimiter && !opts_.split_delimiter->empty()) {
      const auto at = r.title->find(*opts_.split_delimiter);
      if (at != std::string::npos) {
        std::string tail = r.title->substr(at + opts_.split_delimiter->size());
        r.title->resize(at);
        if (!r.answer || text::trim(*r.answer).empty()) r.answer = std::move(tail);
      }
    }
    if (!r.answer) return drop("missing_answer");

    ClickbaitPost p;
    p.source = opts_.source;
    p.question = normalize_line(*r.title);
    p.context = normalize_context(*r.article);
    p.answer = normalize_line(*r.answer);
    if (p.question.empty()) return drop("empty_title");
    if (p.context.empty()) return drop("empty_context");
    if (p.answer.empty()) return drop("empty_answer");
    if (r.url && !text::trim(*r.url).empty()) p.url = text::trim(*r.url);
    if (r.fetched_at && !r.fetched_at->empty()) {
      if (!valid_timestamp(*r.fetched_at)) return drop("invalid_fetched_at");
      p.fetched_at = *r.fetched_at;
    }
    p.id = r.id && !text::trim(*r.id).empty() ? text::nfkc(text::trim(*r.id))
                                               : content_hash_id(p.source, p);
    if (!seen_.insert(p.id).second) return drop("duplicate_id");
    posts_.push_back(std::move(p));
  }

  Corpus finish() && { return Corpus(std::move(posts_), std::move(drops_)); }

 private:
  const IngestOptions& opts_;
  std::vector<ClickbaitPost> posts_;
  std::map<std::string, std::size_t> drops_;
  std::set<std::string> seen_;
};

// Field must be a string if present; other JSON types make the record
// malformed.
bool read_field(const Json& j, const char* key, std::optional<std::string>& out) {
  if (!j.contains(key) || j[key].is_null()) return true;
  if (j[key].is_string()) {
    out = j[key].get<std::string>();
    return true;
  }
  if (j[key].is_number_integer() && std::string_view(key) == "id") {
    out = j[key].dump();
    return true;
  }
  return false;
}

void ingest_jsonl(std::string_view content, CorpusBuilder& b) {
  for (const auto& line : split_lines(content)) {
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      b.drop("malformed_record");
      continue;
    }
    if (!j.is_object()) {
      b.drop("malformed_record");
      continue;
    }
    RawRecord r;
    const bool ok = read_field(j, "id", r.id) && read_field(j, "title", r.title) &&
                    read_field(j, "article", r.article) &&
                    read_field(j, "answer", r.answer) && read_field(j, "url", r.url) &&
                    read_field(j, "fetched_at", r.fetched_at);
    if (!ok) {
      b.drop("malformed_record");
      continue;
    }
    b.add(std::move(r));
  }
}

void ingest_csv(std::string_view content, CorpusBuilder& b) {
  auto rows = parse_csv(content);
  if (rows.empty()) return;
  const auto& header = rows.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[text::trim(header[i])] = i;
  for (const char* required : {"title", "article", "answer"}) {
    if (!col.count(required)) {
      throw ValidationError(std::string("CSV header lacks column '") + required + "'");
    }
  }
  auto cell = [&](const std::vector<std::string>& row,
                  const char* name) -> std::optional<std::string> {
    auto it = col.find(name);
    if (it == col.end() || it->second >= row.size()) return std::nullopt;
    return row[it->second];
  };
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && text::trim(row[0]).empty()) continue;
    if (row.size() != header.size()) {
      b.drop("malformed_record");
      continue;
    }
    b.add(RawRecord{cell(row, "id"), cell(row, "title"), cell(row, "article"),
                    cell(row, "answer"), cell(row, "url"), cell(row, "fetched_at")});
  }
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    row_started = true;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
        break;
      default:
        field.push_back(c);
    }
  }
  if (row_started) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

Corpus ingest_records(std::string_view content, const IngestOptions& opts) {
  CorpusBuilder builder(opts);
  if (opts.format == DumpFormat::jsonl) {
    ingest_jsonl(content, builder);
  } else {
    ingest_csv(content, builder);
  }
  return std::move(builder).finish();
}

Corpus ingest_dump(const std::filesystem::path& path, const IngestOptions& opts) {
  return ingest_records(read_file(path), opts);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.posts()) {
    out += canonical_json(to_json(p));
    out.push_back('\n');
  }
  return out;
}

Corpus parse_corpus(std::string_view content) {
  std::vector<ClickbaitPost> posts;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    posts.push_back(post_from_json(parse_json(line, "corpus line " + std::to_string(line_no))));
  }
  return Corpus(std::move(posts));
}

Corpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

}  // namespace spoilkit
