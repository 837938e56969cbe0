#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace marginmine {

// Dense row-major matrix of sentence embeddings. Immutable once built;
// concurrent readers are safe.
struct EmbeddingMatrix {
    std::uint32_t dim = 0;
    std::size_t count = 0;
    std::vector<float> values; // count * dim, row-major
    bool normalized = false;

    std::span<const float> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
};

// Builds a matrix from raw values, checking shape and finiteness.
EmbeddingMatrix make_matrix(std::uint32_t dim, std::size_t count,
                            std::vector<float> values);

// Binary format: "EMBMAT01", u32 dim, u64 count, count*dim little-endian f32.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingMatrix& matrix,
                      const std::filesystem::path& path);

// Rescales every row to unit Euclidean norm. Zero-norm rows are an error,
// never dropped: dropping would desynchronize ids and texts.
EmbeddingMatrix normalize_l2(EmbeddingMatrix matrix);

// Sentence-id <-> text sidecar. Line i holds the text for id i. Texts carry
// no tabs or newlines (reserved for the TSV output format).
struct SentenceTable {
    std::vector<std::string> texts;

    std::size_t count() const { return texts.size(); }
};

// Interior tabs are replaced by single spaces on ingestion.
std::string scrub_sentence(std::string text);

SentenceTable load_sentences(const std::filesystem::path& path);
void write_sentences(const SentenceTable& table,
                     const std::filesystem::path& path);

} // namespace marginmine
