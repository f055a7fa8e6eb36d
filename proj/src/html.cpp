#include "spoilkit/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>

#include "spoilkit/text.hpp"

namespace spoilkit {
namespace {

constexpr char kBlockBreak = '\x01';

constexpr std::array<std::string_view, 10> kSkipElements = {
    "script", "style", "nav",   "noscript", "template",
    "svg",    "title", "iframe", "canvas",  "object"};

constexpr std::array<std::string_view, 39> kBlockElements = {
    "address", "article", "aside",    "blockquote", "body",   "br",
    "caption", "dd",      "div",      "dl",         "dt",     "fieldset",
    "figcaption", "figure", "footer", "form",       "h1",     "h2",
    "h3",      "h4",      "h5",       "h6",         "header", "hr",
    "html",    "li",      "main",     "ol",         "p",      "pre",
    "section", "table",   "tbody",    "td",         "tfoot",  "th",
    "thead",   "tr",      "ul"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", U'&'},       {"lt", U'<'},        {"gt", U'>'},
      {"quot", U'"'},      {"apos", U'\''},     {"nbsp", U'\u00A0'},
      {"ensp", U'\u2002'}, {"emsp", U'\u2003'}, {"thinsp", U'\u2009'},
      {"ndash", U'–'}, {"mdash", U'—'}, {"hellip", U'…'},
      {"lsquo", U'‘'}, {"rsquo", U'’'}, {"sbquo", U'‚'},
      {"ldquo", U'“'}, {"rdquo", U'”'}, {"bdquo", U'„'},
      {"laquo", U'«'}, {"raquo", U'»'}, {"bull", U'•'},
      {"middot", U'·'}, {"copy", U'©'}, {"reg", U'®'},
      {"trade", U'™'}, {"deg", U'°'},  {"euro", U'€'},
      {"pound", U'£'}, {"yen", U'¥'},  {"cent", U'¢'},
      {"sect", U'§'},  {"para", U'¶'}, {"times", U'×'},
      {"divide", U'÷'}, {"frac12", U'½'}, {"frac14", U'¼'},
      {"frac34", U'¾'}, {"iexcl", U'¡'}, {"iquest", U'¿'},
      {"aacute", U'á'}, {"eacute", U'é'}, {"iacute", U'í'},
      {"oacute", U'ó'}, {"uacute", U'ú'}, {"Aacute", U'Á'},
      {"Eacute", U'É'}, {"agrave", U'à'}, {"egrave", U'è'},
      {"ntilde", U'ñ'}, {"Ntilde", U'Ñ'}, {"uuml", U'ü'},
      {"ouml", U'ö'},  {"auml", U'ä'}, {"Uuml", U'Ü'},
      {"Ouml", U'Ö'},  {"Auml", U'Ä'}, {"szlig", U'ß'},
      {"ccedil", U'ç'}, {"zwnj", U'\u200C'}, {"zwj", U'\u200D'},
  };
  return table;
}

bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Position of the '>' closing the tag opened at `lt`, honoring quoted
// attribute values, or npos.
std::size_t find_tag_end(std::string_view s, std::size_t lt) {
  char quote = 0;
  for (std::size_t i = lt + 1; i < s.size(); ++i) {
    const char c = s[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      // Quotes only delimit values after '='; a stray apostrophe in text
      // that merely looks like a tag must not swallow the page.
      if (i > 0 && s[i - 1] == '=') quote = c;
    } else if (c == '>') {
      return i;
    } else if (c == '<') {
      return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

// Skips past the closing tag of a raw-content element such as <script>.
std::size_t skip_element(std::string_view s, std::size_t from,
                         std::string_view name) {
  const std::string lowered = lower_ascii(s.substr(from));
  const std::string needle = "</" + std::string(name);
  std::size_t pos = 0;
  while ((pos = lowered.find(needle, pos)) != std::string::npos) {
    const std::size_t after = pos + needle.size();
    if (after >= lowered.size() || lowered[after] == '>' ||
        std::isspace(static_cast<unsigned char>(lowered[after]))) {
      const std::size_t gt = lowered.find('>', after);
      return gt == std::string::npos ? s.size() : from + gt + 1;
    }
    pos = after;
  }
  return s.size();
}

// Removes tags and skipped elements. Block boundaries become kBlockBreak.
std::string strip_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool saw_tag = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c != '<' || i + 1 >= s.size()) {
      out.push_back(c);
      ++i;
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      const std::size_t close = s.find("-->", i + 4);
      i = close == std::string_view::npos ? s.size() : close + 3;
      saw_tag = true;
      continue;
    }
    const char next = s[i + 1];
    const bool closing = next == '/';
    const bool decl = next == '!' || next == '?';
    const std::size_t name_at = i + (closing ? 2 : 1);
    if (!decl && (name_at >= s.size() || !is_ascii_alpha(s[name_at]))) {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::size_t gt = find_tag_end(s, i);
    if (gt == std::string_view::npos) {
      out.push_back(c);
      ++i;
      continue;
    }
    saw_tag = true;
    if (decl) {
      i = gt + 1;
      continue;
    }
    std::size_t name_end = name_at;
    while (name_end < gt && (std::isalnum(static_cast<unsigned char>(s[name_end])) ||
                             s[name_end] == '-')) {
      ++name_end;
    }
    const std::string name = lower_ascii(s.substr(name_at, name_end - name_at));
    const bool self_closing = gt > i && s[gt - 1] == '/';
    i = gt + 1;
    if (!closing && !self_closing && contains(kSkipElements, name)) {
      i = skip_element(s, i, name);
      continue;
    }
    if (contains(kBlockElements, name)) out.push_back(kBlockBreak);
  }
  if (saw_tag) {
    // Source newlines inside markup are ordinary whitespace.
    std::replace(out.begin(), out.end(), '\n', ' ');
  }
  return out;
}

// Paragraphs are separated by '\n'; each is collapsed and empty ones are
// dropped. Other control characters count as spaces.
std::string normalize_paragraphs(std::string_view s) {
  std::string out;
  std::string para;
  auto flush = [&] {
    std::string collapsed = text::collapse_spaces(para);
    para.clear();
    if (collapsed.empty()) return;
    if (!out.empty()) out.push_back('\n');
    out += collapsed;
  };
  for (const char c : s) {
    if (c == '\n') {
      flush();
    } else if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
      para.push_back(' ');
    } else {
      para.push_back(c);
    }
  }
  flush();
  return out;
}

std::string extract_once(std::string_view raw) {
  std::string cleaned(raw);
  std::replace(cleaned.begin(), cleaned.end(), kBlockBreak, ' ');
  std::string stripped = strip_tags(cleaned);
  // Breaks are resolved before decoding so "&#1;" cannot forge one.
  std::replace(stripped.begin(), stripped.end(), kBlockBreak, '\n');
  return normalize_paragraphs(decode_entities(stripped));
}

}  // namespace

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 32) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    char32_t cp = 0;
    bool ok = false;
    if (body.size() >= 2 && body[0] == '#') {
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      if (!digits.empty() && digits.size() <= 8) {
        ok = true;
        std::uint32_t v = 0;
        for (const char d : digits) {
          int x = -1;
          if (d >= '0' && d <= '9') x = d - '0';
          else if (hex && d >= 'a' && d <= 'f') x = d - 'a' + 10;
          else if (hex && d >= 'A' && d <= 'F') x = d - 'A' + 10;
          if (x < 0) {
            ok = false;
            break;
          }
          v = v * (hex ? 16 : 10) + static_cast<std::uint32_t>(x);
        }
        if (ok) {
          const bool invalid = v == 0 || v > 0x10FFFF || (v >= 0xD800 && v <= 0xDFFF);
          cp = invalid ? U'\uFFFD' : static_cast<char32_t>(v);
        }
      }
    } else {
      const auto& table = named_entities();
      if (auto it = table.find(body); it != table.end()) {
        cp = it->second;
        ok = true;
      }
    }
    if (!ok) {
      out.push_back(s[i++]);
      continue;
    }
    text::append_utf8(out, cp);
    i = semi + 1;
  }
  return out;
}

std::string extract_article_text(std::string_view raw_html) {
  // Decoding can expose new markup ("&lt;p&gt;"), so iterate to a fixed
  // point. Every pass that changes the text shrinks or canonicalizes it.
  std::string current = extract_once(raw_html);
  for (int pass = 0; pass < 64; ++pass) {
    std::string next = extract_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace spoilkit
