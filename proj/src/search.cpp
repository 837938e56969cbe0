#include "marginmine/search.hpp"

#include "marginmine/errors.hpp"
#include "marginmine/parallel.hpp"

#include <algorithm>

namespace marginmine {

namespace {

bool hit_before(const Hit& a, const Hit& b) {
    if (a.sim != b.sim) {
        return a.sim > b.sim;
    }
    return a.id < b.id;
}

} // namespace

NeighborTable search_exact(const EmbeddingMatrix& data,
                           const EmbeddingMatrix& queries, std::uint32_t k,
                           std::size_t threads) {
    if (k == 0) {
        throw parameter_error("search needs k >= 1");
    }
    if (data.dim != queries.dim) {
        throw shape_error("query dim " + std::to_string(queries.dim) +
                          " does not match database dim " +
                          std::to_string(data.dim));
    }
    if (!data.normalized || !queries.normalized) {
        throw data_error("exact search requires normalized matrices");
    }

    const std::size_t take =
        data.count < k ? data.count : static_cast<std::size_t>(k);
    NeighborTable table(queries.count);

    parallel_for(queries.count, threads,
                 [&](std::size_t begin, std::size_t end) {
        std::vector<Hit> hits(data.count);
        for (std::size_t q = begin; q < end; ++q) {
            const float* qv = queries.values.data() + q * queries.dim;
            for (std::size_t i = 0; i < data.count; ++i) {
                const float* dv = data.values.data() + i * data.dim;
                double dot = 0.0;
                for (std::uint32_t j = 0; j < data.dim; ++j) {
                    dot += static_cast<double>(qv[j]) * dv[j];
                }
                hits[i] = {static_cast<std::uint64_t>(i), dot};
            }
            auto& out = table[q];
            out.assign(hits.begin(), hits.end());
            if (take < out.size()) {
                std::nth_element(out.begin(), out.begin() + take, out.end(),
                                 hit_before);
                out.resize(take);
            }
            std::sort(out.begin(), out.end(), hit_before);
        }
    });

    return table;
}

} // namespace marginmine
