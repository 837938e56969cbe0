#include "marginmine/manifest.hpp"

#include "marginmine/errors.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace marginmine {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open file for digest: " + path.string());
    }
    std::uint64_t hash = 0xcbf29ce484222325ull;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = static_cast<std::size_t>(in.gcount());
        for (std::size_t i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(hash));
    return hex;
}

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& primary_output) {
    nlohmann::json doc;
    doc["command"] = manifest.command;
    doc["version"] = kToolVersion;
    doc["seed"] = manifest.seed;
    doc["config"] = manifest.config;
    doc["inputs"] = manifest.input_digests;
    doc["output"] = primary_output.string();
    doc["duration_seconds"] = manifest.duration_seconds;

    std::filesystem::path path = primary_output;
    path += ".manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open manifest: " + path.string());
    }
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) {
        throw io_error("failed writing manifest to " + path.string());
    }
}

} // namespace marginmine
