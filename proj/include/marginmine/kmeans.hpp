#pragma once

#include "marginmine/embeddings.hpp"

#include <cstdint>
#include <vector>

namespace marginmine {

struct KMeansModel {
    std::uint32_t k = 0;
    std::uint32_t dim = 0;
    std::vector<float> centroids; // k * dim, row-major
    int iterations_run = 0;
    double inertia = 0.0;              // sum of squared distances at convergence
    std::vector<double> inertia_trace; // one entry per assignment pass

    std::span<const float> centroid(std::uint32_t c) const {
        return {centroids.data() + static_cast<std::size_t>(c) * dim, dim};
    }
};

struct KMeansOptions {
    int max_iters = 25;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

// Lloyd's algorithm with k-means++ seeding from a seeded PRNG. Deterministic
// for a fixed seed at any thread count: assignments are computed in parallel
// but all accumulation runs in point order. Empty clusters are re-seeded from
// the point farthest from its centroid.
KMeansModel train_kmeans_raw(const float* data, std::size_t n,
                             std::uint32_t dim, std::uint32_t k,
                             const KMeansOptions& opts);

// data must be normalized and hold at least k rows.
KMeansModel train_kmeans(const EmbeddingMatrix& data, std::uint32_t k,
                         int max_iters, std::uint64_t seed,
                         std::size_t threads = 1);

// Index of the nearest centroid (squared Euclidean, ties to the lowest id)
// and the squared distance to it.
std::pair<std::uint32_t, double> assign_nearest(const KMeansModel& model,
                                                const float* vec);

} // namespace marginmine
