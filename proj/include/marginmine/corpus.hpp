#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace marginmine {

struct Document {
    std::string doc_id;
    std::string lang;
    std::string text;
};

struct IngestResult {
    std::vector<Document> documents;
    std::size_t missing_field = 0;
    std::size_t bad_json = 0;
};

// Reads newline-delimited JSON objects, pulling `text_field` from each one.
// Lines without the field are counted and skipped. Malformed JSON is skipped
// and counted by default; with fail_fast it raises an error naming the line.
// The document id comes from an "id" member when present, else the 1-based
// line number.
IngestResult ingest_jsonl(const std::filesystem::path& path,
                          const std::string& text_field,
                          const std::string& lang, bool fail_fast = false);

// Order-preserving exact dedup: two sentences are duplicates when their
// NFC-normalized, whitespace-trimmed forms match. The first occurrence is
// kept verbatim.
std::vector<std::string> dedup(const std::vector<std::string>& sentences);

// NFC-normalize then trim leading/trailing whitespace; the dedup key.
std::string dedup_key(const std::string& sentence);

} // namespace marginmine
