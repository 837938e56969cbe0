#include "marginmine/corpus.hpp"

#include "marginmine/errors.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

namespace marginmine {

namespace {

bool is_trim_space(unsigned char ch) {
    return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' ||
           ch == '\f' || ch == '\v';
}

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_trim_space(static_cast<unsigned char>(s[begin]))) {
        ++begin;
    }
    while (end > begin &&
           is_trim_space(static_cast<unsigned char>(s[end - 1]))) {
        --end;
    }
    return s.substr(begin, end - begin);
}

const icu::Normalizer2& nfc() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* instance =
        icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || instance == nullptr) {
        throw io_error("ICU NFC normalizer unavailable");
    }
    return *instance;
}

} // namespace

IngestResult ingest_jsonl(const std::filesystem::path& path,
                          const std::string& text_field,
                          const std::string& lang, bool fail_fast) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open input file: " + path.string());
    }
    IngestResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            if (fail_fast) {
                throw format_error("invalid JSON on line " +
                                   std::to_string(line_no) + " of " +
                                   path.string() + ": " + e.what());
            }
            ++result.bad_json;
            continue;
        }
        if (!obj.is_object() || !obj.contains(text_field) ||
            !obj[text_field].is_string()) {
            if (fail_fast && obj.is_object() && obj.contains(text_field)) {
                throw format_error("field '" + text_field +
                                   "' is not a string on line " +
                                   std::to_string(line_no) + " of " +
                                   path.string());
            }
            ++result.missing_field;
            continue;
        }
        Document doc;
        doc.lang = lang;
        doc.text = obj[text_field].get<std::string>();
        if (obj.contains("id")) {
            const auto& id = obj["id"];
            if (id.is_string()) {
                doc.doc_id = id.get<std::string>();
            } else if (id.is_number_integer()) {
                doc.doc_id = std::to_string(id.get<long long>());
            } else {
                doc.doc_id = std::to_string(line_no);
            }
        } else {
            doc.doc_id = std::to_string(line_no);
        }
        result.documents.push_back(std::move(doc));
    }
    return result;
}

std::string dedup_key(const std::string& sentence) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::UnicodeString input = icu::UnicodeString::fromUTF8(sentence);
    const icu::UnicodeString normalized = nfc().normalize(input, status);
    std::string key;
    if (U_FAILURE(status)) {
        // Ill-formed input falls back to byte identity; mining never sees
        // the key, only the original sentence.
        key = sentence;
    } else {
        normalized.toUTF8String(key);
    }
    return trim(key);
}

std::vector<std::string> dedup(const std::vector<std::string>& sentences) {
    std::vector<std::string> out;
    out.reserve(sentences.size());
    std::unordered_set<std::string> seen;
    for (const auto& sentence : sentences) {
        if (seen.insert(dedup_key(sentence)).second) {
            out.push_back(sentence);
        }
    }
    return out;
}

} // namespace marginmine
