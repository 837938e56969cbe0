#include "marginmine/segment.hpp"

#include "marginmine/errors.hpp"

#include <algorithm>

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace marginmine {

namespace {

bool is_trim_space(unsigned char ch) {
    return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' ||
           ch == '\f' || ch == '\v';
}

std::string trimmed(const std::string& s, std::size_t begin, std::size_t end) {
    while (begin < end && is_trim_space(static_cast<unsigned char>(s[begin]))) {
        ++begin;
    }
    while (end > begin &&
           is_trim_space(static_cast<unsigned char>(s[end - 1]))) {
        --end;
    }
    return s.substr(begin, end - begin);
}

// Full-width marks that end a sentence without any following space.
bool is_cjk_terminator(UChar32 cp) {
    return cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F;
}

bool is_closer(UChar32 cp) {
    switch (cp) {
    case U')':
    case U']':
    case U'"':
    case U'\'':
    case 0x00BB:  // »
    case 0x201D:  // ”
    case 0x2019:  // ’
    case 0x300D:  // 」
    case 0x300F:  // 』
    case 0xFF09:  // ）
    case 0x3009:  // 〉
    case 0x300B:  // 》
        return true;
    default:
        return false;
    }
}

// Alphabetic run immediately before byte offset `pos`, lowercase-folded.
// Empty when the preceding character is not a letter. `cp_count` reports the
// number of codepoints in the run.
std::string token_before(const std::string& text, std::int32_t pos,
                         std::size_t& cp_count) {
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    std::vector<UChar32> cps;
    std::int32_t i = pos;
    while (i > 0 && cps.size() < 16) {
        std::int32_t prev = i;
        UChar32 cp;
        U8_PREV(s, 0, prev, cp);
        if (cp < 0 || !u_isalpha(cp)) {
            break;
        }
        cps.push_back(u_tolower(cp));
        i = prev;
    }
    cp_count = cps.size();
    std::reverse(cps.begin(), cps.end());
    icu::UnicodeString us;
    for (const UChar32 cp : cps) {
        us.append(cp);
    }
    std::string out;
    us.toUTF8String(out);
    return out;
}

struct LangRules {
    const char* lang;
    bool regex_fallback;
    std::initializer_list<const char*> abbreviations;
};

const LangRules kBuiltinRules[] = {
    {"en", false,
     {"mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "inc",
      "ltd", "co", "gen", "col", "sgt", "capt", "mt", "ft", "ave", "dept",
      "univ", "approx", "est", "fig", "vol", "no", "pp", "ed", "al"}},
    {"de", false,
     {"dr", "prof", "nr", "ca", "bzw", "usw", "vgl", "ggf", "inkl", "evtl",
      "str", "abb", "tab", "mio", "mrd", "tel", "allg", "geb", "jh"}},
    {"fr", false,
     {"m", "mme", "mlle", "dr", "av", "bd", "etc", "ex", "cf", "vol", "chap",
      "art", "env", "tél", "fig"}},
    {"es", false,
     {"sr", "sra", "srta", "dr", "dra", "av", "avda", "etc", "ej", "pág",
      "cap", "art", "aprox", "tel", "ud", "uds", "núm"}},
    {"it", false,
     {"sig", "dott", "prof", "ing", "avv", "ecc", "es", "pag", "cap", "art",
      "tel", "ca", "geom", "n"}},
    {"pt", false,
     {"sr", "sra", "dr", "dra", "av", "etc", "ex", "pág", "cap", "art", "tel",
      "aprox", "núm", "eng"}},
    {"nl", false,
     {"dhr", "mevr", "dr", "prof", "nr", "ca", "bijv", "enz", "evt", "incl",
      "pag", "tel", "afb", "blz"}},
    {"pl", false,
     {"dr", "prof", "mgr", "inż", "ul", "al", "np", "itp", "itd", "tzn", "tj",
      "ok", "godz", "wg", "zob", "str"}},
    {"cs", false,
     {"dr", "prof", "ing", "mgr", "ul", "např", "atd", "apod", "tzn", "tj",
      "str", "obr", "tab", "cca", "resp"}},
    {"ru", false,
     {"г", "гг", "ул", "пр", "им", "др", "проч", "см", "стр", "рис", "табл",
      "тел", "обл", "акад", "проф"}},
    {"hu", false,
     {"dr", "prof", "kb", "pl", "stb", "ún", "ui", "utca", "tel", "old",
      "ábra", "db"}},
    {"id", false,
     {"bpk", "ibu", "sdr", "dr", "jl", "no", "tel", "dll", "dsb", "yth",
      "hal", "thn"}},
    {"zh", true, {}},
    {"ja", true, {}},
    {"ko", false, {}},
};

} // namespace

SegmenterRules rules_for_language(const std::string& lang) {
    if (lang == "th") {
        throw config_error("Thai sentence segmentation is not supported");
    }
    for (const auto& entry : kBuiltinRules) {
        if (lang == entry.lang) {
            SegmenterRules rules;
            rules.lang = lang;
            rules.regex_fallback = entry.regex_fallback;
            for (const char* abbr : entry.abbreviations) {
                rules.abbreviations.insert(abbr);
            }
            return rules;
        }
    }
    // Unknown language: English abbreviation set, and the spacing-free
    // fallback so scripts without inter-sentence spacing still split.
    SegmenterRules rules = rules_for_language("en");
    rules.lang = lang;
    rules.regex_fallback = true;
    return rules;
}

std::vector<std::string> supported_segmenter_languages() {
    std::vector<std::string> langs;
    for (const auto& entry : kBuiltinRules) {
        langs.push_back(entry.lang);
    }
    std::sort(langs.begin(), langs.end());
    return langs;
}

std::vector<std::string> segment(const std::string& text,
                                 const SegmenterRules& rules) {
    std::vector<std::string> out;
    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto len = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    std::int32_t start = 0;

    const auto flush = [&](std::int32_t end) {
        std::string sentence = trimmed(text, static_cast<std::size_t>(start),
                                       static_cast<std::size_t>(end));
        if (!sentence.empty()) {
            out.push_back(std::move(sentence));
        }
        start = end;
    };

    const auto is_terminator = [&](UChar32 cp) {
        return rules.terminators.find(static_cast<char32_t>(cp)) !=
               std::u32string::npos;
    };

    while (i < len) {
        const std::int32_t cp_start = i;
        UChar32 cp;
        U8_NEXT(s, i, len, cp);
        if (cp < 0) {
            continue;  // ill-formed byte carried along unchanged
        }
        if (cp == '\n' || cp == '\r') {
            flush(i);
            continue;
        }
        if (!is_terminator(cp)) {
            continue;
        }

        if (cp == '.') {
            // Decimal point: digit on both sides.
            std::int32_t prev = cp_start;
            if (prev > 0 && i < len) {
                UChar32 before;
                U8_PREV(s, 0, prev, before);
                std::int32_t next_i = i;
                UChar32 after;
                U8_NEXT(s, next_i, len, after);
                if (before >= 0 && after >= 0 && u_isdigit(before) &&
                    u_isdigit(after)) {
                    continue;
                }
            }
            std::size_t cp_count = 0;
            const std::string token = token_before(text, cp_start, cp_count);
            if (cp_count == 1) {
                continue;  // single-letter initial, "J. Smith"
            }
            if (!token.empty() &&
                rules.abbreviations.find(token) != rules.abbreviations.end()) {
                continue;
            }
        }

        // Absorb trailing terminators ("?!", "...") and closing quotes or
        // brackets so they stay with the sentence.
        std::int32_t end = i;
        while (end < len) {
            std::int32_t peek = end;
            UChar32 next;
            U8_NEXT(s, peek, len, next);
            if (next >= 0 && (is_terminator(next) || is_closer(next))) {
                end = peek;
            } else {
                break;
            }
        }

        bool boundary = rules.regex_fallback || is_cjk_terminator(cp);
        if (!boundary) {
            if (end >= len) {
                boundary = true;
            } else {
                std::int32_t peek = end;
                UChar32 next;
                U8_NEXT(s, peek, len, next);
                boundary = next >= 0 && u_isUWhiteSpace(next);
            }
        }
        if (boundary) {
            flush(end);
            i = end;
        }
    }
    flush(len);
    return out;
}

} // namespace marginmine
