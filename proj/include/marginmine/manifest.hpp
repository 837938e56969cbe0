#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace marginmine {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const void* data, std::size_t size);

// FNV-1a 64 over the file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;          // flag -> value
    std::map<std::string, std::string> input_digests;   // path -> digest
    std::uint64_t seed = 0;
    double duration_seconds = 0.0;  // informational; varies run to run
};

// Serializes the manifest as pretty-printed JSON at <output>.manifest.json.
void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& primary_output);

} // namespace marginmine
