#pragma once

// Shared fixtures and hand-rolled generators for the test binaries.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "spoilkit/corpus.hpp"
#include "spoilkit/metrics.hpp"
#include "spoilkit/spanlab.hpp"

namespace spoilkit::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, n); n > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  // Uniform in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p; }
  std::uint64_t next() { return gen_(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 gen_;
};

// Words "<prefix>0" .. "<prefix>{vocab-1}".
inline std::vector<std::string> random_words(Rng& rng, std::size_t count, std::size_t vocab,
                                             const std::string& prefix = "w") {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(rng.below(vocab)));
  return out;
}

inline std::string join(const std::vector<std::string>& words, const std::string& sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

inline ClickbaitPost make_post(std::string id, std::string question, std::string context,
                               std::string answer, Source source = Source::reddit) {
  ClickbaitPost p;
  p.id = std::move(id);
  p.source = source;
  p.question = std::move(question);
  p.context = std::move(context);
  p.answer = std::move(answer);
  return p;
}

// A context of filler words with the answer spliced in `copies` times at
// random non-adjacent word positions. Filler and answer vocabularies are
// disjoint, so the splices are the only occurrences. `starts` receives the
// code point offset of each splice.
struct Injected {
  std::string context;
  std::string answer;
  std::size_t core_length = 0;  // answer minus trailing punctuation
  std::vector<std::size_t> starts;
};

inline Injected inject_answer(Rng& rng, std::size_t copies) {
  const std::size_t filler_len = rng.between(5, 120);
  const auto filler = random_words(rng, filler_len, 300, "ctx");
  const auto answer_words = random_words(rng, rng.between(1, 8), 50, "ans");
  Injected out;
  out.answer = join(answer_words);
  out.core_length = out.answer.size();
  if (rng.chance(0.3)) out.answer += ".";

  // Distinct slots in [0, filler_len]; a splice goes before filler[slot], so
  // two splices always have filler between them.
  std::vector<std::size_t> slots;
  while (slots.size() < copies) {
    const std::size_t s = rng.below(filler_len + 1);
    if (std::find(slots.begin(), slots.end(), s) == slots.end()) slots.push_back(s);
  }
  std::sort(slots.begin(), slots.end());

  std::size_t next = 0;
  for (std::size_t i = 0; i <= filler_len; ++i) {
    if (next < slots.size() && slots[next] == i) {
      if (!out.context.empty()) out.context += ' ';
      out.starts.push_back(out.context.size());  // ASCII: bytes == code points
      out.context += out.answer;
      ++next;
    }
    if (i < filler_len) {
      if (!out.context.empty()) out.context += ' ';
      out.context += filler[i];
    }
  }
  return out;
}

// Twenty auto-acceptable posts, ten per source, each answer two or more
// tokens long and unique within its context.
inline std::vector<ClickbaitPost> twenty_posts() {
  static const std::vector<std::string> subjects = {
      "baking soda",     "cold showers",   "orange peels",   "green tea",      "dark chocolate",
      "morning walks",   "olive oil",      "ginger root",    "sea salt",       "white vinegar",
      "coconut water",   "apple cider",    "raw honey",      "lemon juice",    "black pepper",
      "brown rice",      "sweet potatoes", "chia seeds",     "garlic cloves",  "oat milk"};
  std::vector<ClickbaitPost> posts;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const std::string n = std::to_string(i);
    const std::string context = "Researchers in study " + n +
                                " looked at daily habits. The surprising winner was " +
                                subjects[i] + ", according to the lead author. Results varied.";
    posts.push_back(make_post("post-" + (i < 10 ? "0" + n : n),
                              "You will not believe what helps most (" + n + ")", context,
                              subjects[i], i % 2 ? Source::facebook : Source::reddit));
  }
  return posts;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("spoilkit-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace spoilkit::testing
