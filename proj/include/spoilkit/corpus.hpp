#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoilkit/jsonl.hpp"

namespace spoilkit {

enum class Source { reddit, facebook, other };

std::string_view to_string(Source s);
Source parse_source(std::string_view s);

// Set by the cleaner; flagged posts are kept in the corpus and dropped at
// export unless explicitly included.
enum class NoiseFlag { none, toxic, opinion };

std::string_view to_string(NoiseFlag f);
NoiseFlag parse_noise_flag(std::string_view s);

// One scraped (context, question, answer) triple.
struct ClickbaitPost {
  std::string id;
  Source source = Source::other;
  std::string question;  // the clickbait title
  std::string context;   // plain-text article body, NFKC
  std::string answer;    // the user-written spoiler
  std::optional<std::string> url;
  std::optional<std::string> fetched_at;  // ISO-8601 UTC, "...Z"
  NoiseFlag noise_flag = NoiseFlag::none;

  bool operator==(const ClickbaitPost&) const = default;
};

Json to_json(const ClickbaitPost& post);
ClickbaitPost post_from_json(const Json& j);

struct CorpusStats {
  std::size_t count = 0;
  std::map<Source, std::size_t> per_source_counts;
  std::size_t dropped_count = 0;
  std::map<std::string, std::size_t> drop_reasons;

  Json to_json() const;
};

// Immutable, validated collection of posts. Ids are unique.
class Corpus {
 public:
  Corpus() = default;
  // Throws ValidationError on duplicate ids or posts with empty fields.
  explicit Corpus(std::vector<ClickbaitPost> posts,
                  std::map<std::string, std::size_t> drop_reasons = {});

  const std::vector<ClickbaitPost>& posts() const { return posts_; }
  const CorpusStats& stats() const { return stats_; }
  std::size_t size() const { return posts_.size(); }
  const ClickbaitPost* find(std::string_view id) const;

  bool operator==(const Corpus& other) const { return posts_ == other.posts_; }

 private:
  std::vector<ClickbaitPost> posts_;
  CorpusStats stats_;
};

enum class DumpFormat { jsonl, csv };

DumpFormat parse_dump_format(std::string_view s);

struct IngestOptions {
  Source source = Source::other;
  DumpFormat format = DumpFormat::jsonl;
  // When set, a title holding "title <delim> answer" is split at the first
  // delimiter. An explicit non-empty answer field still wins.
  std::optional<std::string> split_delimiter;
};

// Parses and validates a raw dump. Invalid records are counted by reason in
// CorpusStats, never fatal.
Corpus ingest_records(std::string_view content, const IngestOptions& opts);

// Throws IoError if the file cannot be read.
Corpus ingest_dump(const std::filesystem::path& path, const IngestOptions& opts);

// NFKC plus HTML extraction, iterated until stable.
std::string normalize_context(std::string_view raw);

// Corpus files are JSONL of ClickbaitPost in canonical form.
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view content);
Corpus load_corpus(const std::filesystem::path& path);

// Minimal RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view content);

}  // namespace spoilkit
