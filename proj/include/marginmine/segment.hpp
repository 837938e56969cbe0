#pragma once

#include <string>
#include <unordered_set>
#include <vector>

namespace marginmine {

struct SegmenterRules {
    std::string lang;
    // Tokens after which a period does not end a sentence, lowercase-folded,
    // stored without the trailing period.
    std::unordered_set<std::string> abbreviations;
    // Sentence-final codepoints.
    std::u32string terminators = U".!?…。！？";
    // Break on a terminator even when no whitespace follows, for scripts
    // written without spacing.
    bool regex_fallback = false;
};

// Built-in rule table. Unknown languages fall back to the English rules with
// regex_fallback enabled. Thai is rejected as a configuration error.
SegmenterRules rules_for_language(const std::string& lang);

std::vector<std::string> supported_segmenter_languages();

// Splits text into trimmed, non-empty sentences. Newlines are hard breaks.
// A period is suppressed as a boundary after a known abbreviation, after a
// single-letter initial, and between digits.
std::vector<std::string> segment(const std::string& text,
                                 const SegmenterRules& rules);

} // namespace marginmine
