#pragma once

#include <string>
#include <string_view>

namespace spoilkit {

/// Reduces a (possibly malformed) HTML page to plain article text.
///
/// Content of script, style, nav and similar non-article elements is
/// dropped, block-level elements become paragraph breaks, character
/// references are decoded and whitespace is normalized. Paragraphs are
/// joined with a single '\n'. A '<' that does not open a well-formed tag is
/// kept as text. The result is a fixed point: applying the function to its
/// own output returns the same string.
std::string extract_article_text(std::string_view raw_html);

/// Decodes named and numeric character references. Unknown or malformed
/// references are left as-is.
std::string decode_entities(std::string_view s);

}  // namespace spoilkit
