#pragma once

#include "marginmine/embeddings.hpp"

#include <cstdint>
#include <vector>

namespace marginmine {

struct Hit {
    std::uint64_t id = 0;
    double sim = 0.0; // cosine similarity
};

// One entry per query: up to k hits sorted by similarity descending, ties
// broken by ascending id. Ids are unique within a query.
using NeighborTable = std::vector<std::vector<Hit>>;

// True top-k by dot product over unit vectors. Returns all rows when the
// database holds fewer than k.
NeighborTable search_exact(const EmbeddingMatrix& data,
                           const EmbeddingMatrix& queries, std::uint32_t k,
                           std::size_t threads = 1);

} // namespace marginmine
