#pragma once

#include "marginmine/embeddings.hpp"
#include "marginmine/kmeans.hpp"
#include "marginmine/pq.hpp"
#include "marginmine/search.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace marginmine {

// Inverted-file index with product-quantized residuals. Vectors are assigned
// to their nearest coarse centroid; each inverted list stores (id, m-byte
// code) where the code quantizes the residual against the cell centroid.
// Distances are squared Euclidean over unit vectors, converted to cosine as
// 1 - d^2/2 at the API boundary. Immutable after build.
struct IvfPqIndex {
    std::uint32_t dim = 0;
    std::uint32_t nlist = 0;
    std::uint32_t m = 0;
    std::uint32_t ksub = 0;
    std::uint64_t count = 0;
    KMeansModel coarse;
    ProductQuantizer pq;
    std::vector<std::vector<std::uint64_t>> list_ids;
    std::vector<std::vector<std::uint8_t>> list_codes; // len * m per list
    // Optional orthogonal rotation applied to vectors before coarse
    // assignment and PQ. Empty means identity. Not part of the serialized
    // format, so only identity indexes can be saved.
    std::vector<float> rotation; // dim * dim, row-major
};

struct IndexBuildOptions {
    int max_iters = 25;
    std::size_t threads = 1;
    std::vector<float> rotation; // empty = identity
};

IvfPqIndex build_index(const EmbeddingMatrix& data, std::uint32_t nlist,
                       std::uint32_t m, std::uint64_t seed,
                       const IndexBuildOptions& opts = {});

// Scans the nprobe nearest cells per query; candidate distances come from
// per-subspace lookup tables over the query residual (ADC).
NeighborTable search_ivfpq(const IvfPqIndex& index,
                           const EmbeddingMatrix& queries, std::uint32_t k,
                           std::uint32_t nprobe, std::size_t threads = 1);

// Serialized layout: "IVFPQ001", u32 dim, u32 nlist, u32 m, u32 ksub,
// u64 count, coarse centroids (f32), codebooks (f32), then per list:
// u64 length, ids (u64), codes (u8). All little-endian; round-trips
// bit-exactly.
void save_index(const IvfPqIndex& index, const std::filesystem::path& path);
IvfPqIndex load_index(const std::filesystem::path& path);

// Byte accounting for one serialized index, split so the per-vector
// compression ratio (raw bytes / code bytes) can be reported separately
// from ids and global overhead.
struct IndexStats {
    std::uint64_t raw_vector_bytes = 0; // count * dim * 4
    std::uint64_t code_bytes = 0;       // count * m
    std::uint64_t id_bytes = 0;         // count * 8
    std::uint64_t overhead_bytes = 0;   // header, centroids, codebooks, list lengths
};

IndexStats index_stats(const IvfPqIndex& index);

// Picks the desk-scale default cell count: min(ceil(4*sqrt(count)), count).
std::uint32_t default_nlist(std::size_t count);

} // namespace marginmine
