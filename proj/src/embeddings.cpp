#include "marginmine/embeddings.hpp"

#include "marginmine/errors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace marginmine {

namespace {

constexpr char kMagic[8] = {'E', 'M', 'B', 'M', 'A', 'T', '0', '1'};

void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(b), 8);
}

bool read_u32_le(std::istream& in, std::uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        return false;
    }
    v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return true;
}

bool read_u64_le(std::istream& in, std::uint64_t& v) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        return false;
    }
    v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return true;
}

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559,
              "IEEE-754 binary32 floats required");

} // namespace

EmbeddingMatrix make_matrix(std::uint32_t dim, std::size_t count,
                            std::vector<float> values) {
    if (dim == 0) {
        throw shape_error("embedding dim must be positive");
    }
    if (values.size() != static_cast<std::size_t>(dim) * count) {
        throw shape_error("embedding values do not match dim*count: got " +
                          std::to_string(values.size()) + ", expected " +
                          std::to_string(static_cast<std::size_t>(dim) * count));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw data_error("non-finite embedding value at row " +
                             std::to_string(i / dim));
        }
    }
    EmbeddingMatrix m;
    m.dim = dim;
    m.count = count;
    m.values = std::move(values);
    m.normalized = false;
    return m;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open embedding file: " + path.string());
    }
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw format_error("bad embedding magic in " + path.string());
    }
    std::uint32_t dim = 0;
    std::uint64_t count = 0;
    if (!read_u32_le(in, dim) || !read_u64_le(in, count)) {
        throw format_error("truncated embedding header in " + path.string());
    }
    if (dim == 0) {
        throw format_error("embedding dim is zero in " + path.string());
    }
    if (count > std::numeric_limits<std::size_t>::max() / dim / sizeof(float)) {
        throw format_error("embedding header overflows in " + path.string());
    }
    const std::size_t n = static_cast<std::size_t>(count) * dim;
    std::vector<float> values(n);
    if (n > 0) {
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float)) {
            throw length_error("embedding payload truncated in " + path.string() +
                               ": expected " + std::to_string(n) + " floats");
        }
    }
    // must be at end of file
    in.peek();
    if (!in.eof()) {
        throw length_error("trailing bytes after embedding payload in " +
                           path.string());
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i])) {
            throw data_error("non-finite embedding value at row " +
                             std::to_string(i / dim) + " in " + path.string());
        }
    }
    EmbeddingMatrix m;
    m.dim = dim;
    m.count = static_cast<std::size_t>(count);
    m.values = std::move(values);
    m.normalized = false;
    return m;
}

void write_embeddings(const EmbeddingMatrix& matrix,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open embedding file for writing: " +
                       path.string());
    }
    out.write(kMagic, 8);
    write_u32_le(out, matrix.dim);
    write_u64_le(out, static_cast<std::uint64_t>(matrix.count));
    if (!matrix.values.empty()) {
        out.write(reinterpret_cast<const char*>(matrix.values.data()),
                  static_cast<std::streamsize>(matrix.values.size() *
                                               sizeof(float)));
    }
    out.flush();
    if (!out) {
        throw io_error("failed writing embeddings to " + path.string());
    }
}

EmbeddingMatrix normalize_l2(EmbeddingMatrix matrix) {
    for (std::size_t i = 0; i < matrix.count; ++i) {
        float* row = matrix.values.data() + i * matrix.dim;
        double norm2 = 0.0;
        for (std::uint32_t j = 0; j < matrix.dim; ++j) {
            norm2 += static_cast<double>(row[j]) * row[j];
        }
        const double norm = std::sqrt(norm2);
        if (norm <= 1e-12) {
            throw data_error("zero-norm embedding row " + std::to_string(i));
        }
        const double inv = 1.0 / norm;
        for (std::uint32_t j = 0; j < matrix.dim; ++j) {
            row[j] = static_cast<float>(row[j] * inv);
        }
    }
    matrix.normalized = true;
    return matrix;
}

std::string scrub_sentence(std::string text) {
    for (char& c : text) {
        if (c == '\t' || c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return text;
}

SentenceTable load_sentences(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open sentence file: " + path.string());
    }
    SentenceTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        table.texts.push_back(scrub_sentence(std::move(line)));
        line.clear();
    }
    return table;
}

void write_sentences(const SentenceTable& table,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open sentence file for writing: " +
                       path.string());
    }
    for (const auto& text : table.texts) {
        out << text << '\n';
    }
    out.flush();
    if (!out) {
        throw io_error("failed writing sentences to " + path.string());
    }
}

} // namespace marginmine
