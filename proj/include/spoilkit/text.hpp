#pragma once

// Unicode helpers shared by every stage. All text is held as UTF-8;
// offsets exposed outside this header are code point offsets.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace spoilkit::text {

// NFKC normal form. Invalid UTF-8 sequences are replaced with U+FFFD.
std::string nfkc(std::string_view utf8);

bool is_nfkc(std::string_view utf8);

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view cps);
void append_utf8(std::string& out, char32_t cp);

std::size_t length_cp(std::string_view utf8);

// Substring by code point range [start, end). Clamped to the string length.
std::string slice_cp(std::string_view utf8, std::size_t start, std::size_t end);

// Letters, digits and the marks that attach to them.
bool is_word_char(char32_t cp);
bool is_space(char32_t cp);
char32_t to_lower(char32_t cp);

std::string trim(std::string_view s);

// Collapses every run of Unicode whitespace to one ASCII space and trims.
std::string collapse_spaces(std::string_view utf8);

// 64-bit FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace spoilkit::text
