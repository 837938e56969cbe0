#include "marginmine/kmeans.hpp"

#include "marginmine/errors.hpp"
#include "marginmine/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

namespace marginmine {

namespace {

double sq_dist(const float* a, const float* b, std::uint32_t dim) {
    double acc = 0.0;
    for (std::uint32_t j = 0; j < dim; ++j) {
        const double d = static_cast<double>(a[j]) - b[j];
        acc += d * d;
    }
    return acc;
}

// Uniform double in [0, 1) drawn directly from the engine's bits, so results
// do not depend on the standard library's distribution implementation.
double canonical(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void seed_plus_plus(const float* data, std::size_t n, std::uint32_t dim,
                    std::uint32_t k, std::mt19937_64& rng,
                    std::vector<float>& centroids) {
    centroids.assign(static_cast<std::size_t>(k) * dim, 0.0f);
    std::vector<bool> used(n, false);

    std::size_t first = static_cast<std::size_t>(canonical(rng) * n);
    if (first >= n) {
        first = n - 1;
    }
    std::memcpy(centroids.data(), data + first * dim, dim * sizeof(float));
    used[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = sq_dist(data + i * dim, centroids.data(), dim);
    }

    for (std::uint32_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double r = canonical(rng) * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                pick = n - 1; // rounding fell off the end
            }
        }
        if (pick == n || used[pick]) {
            // all remaining mass sits on duplicates; take the first unused row
            pick = 0;
            while (pick < n && used[pick]) {
                ++pick;
            }
            if (pick == n) {
                pick = 0;
            }
        }
        used[pick] = true;
        float* dst = centroids.data() + static_cast<std::size_t>(c) * dim;
        std::memcpy(dst, data + pick * dim, dim * sizeof(float));
        for (std::size_t i = 0; i < n; ++i) {
            const double d = sq_dist(data + i * dim, dst, dim);
            if (d < d2[i]) {
                d2[i] = d;
            }
        }
    }
}

} // namespace

KMeansModel train_kmeans_raw(const float* data, std::size_t n,
                             std::uint32_t dim, std::uint32_t k,
                             const KMeansOptions& opts) {
    if (k == 0) {
        throw parameter_error("k-means needs k >= 1");
    }
    if (n < k) {
        throw capacity_error("k-means needs at least k points: have " +
                             std::to_string(n) + ", k=" + std::to_string(k));
    }

    KMeansModel model;
    model.k = k;
    model.dim = dim;

    std::mt19937_64 rng(opts.seed);
    seed_plus_plus(data, n, dim, k, rng, model.centroids);

    std::vector<std::uint32_t> assign(n, 0);
    std::vector<double> dist2(n, 0.0);
    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<std::size_t> counts(k);

    const int max_iters = opts.max_iters > 0 ? opts.max_iters : 1;
    double prev_inertia = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iters; ++iter) {
        parallel_for(n, opts.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const float* x = data + i * dim;
                std::uint32_t best = 0;
                double best_d = sq_dist(x, model.centroids.data(), dim);
                for (std::uint32_t c = 1; c < k; ++c) {
                    const double d = sq_dist(
                        x, model.centroids.data() + static_cast<std::size_t>(c) * dim,
                        dim);
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                }
                assign[i] = best;
                dist2[i] = best_d;
            }
        });

        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            inertia += dist2[i];
        }
        model.inertia_trace.push_back(inertia);
        model.inertia = inertia;
        model.iterations_run = iter + 1;

        if (inertia >= prev_inertia * (1.0 - 1e-6)) {
            break;
        }
        prev_inertia = inertia;
        if (iter + 1 == max_iters) {
            break;
        }

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            const float* x = data + i * dim;
            double* s = sums.data() + static_cast<std::size_t>(assign[i]) * dim;
            for (std::uint32_t j = 0; j < dim; ++j) {
                s[j] += x[j];
            }
            ++counts[assign[i]];
        }

        // Re-seed empty clusters from the farthest assigned point. Stealing a
        // point can empty a singleton cluster, so sweep until stable.
        bool had_empty = true;
        while (had_empty) {
            had_empty = false;
            for (std::uint32_t c = 0; c < k; ++c) {
                if (counts[c] != 0) {
                    continue;
                }
                std::size_t far = n;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (counts[assign[i]] > 1 && dist2[i] > far_d) {
                        far_d = dist2[i];
                        far = i;
                    }
                }
                if (far == n) {
                    break; // nothing left to steal
                }
                const float* x = data + far * dim;
                double* old_sum =
                    sums.data() + static_cast<std::size_t>(assign[far]) * dim;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    old_sum[j] -= x[j];
                }
                --counts[assign[far]];
                assign[far] = c;
                counts[c] = 1;
                double* new_sum = sums.data() + static_cast<std::size_t>(c) * dim;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    new_sum[j] = x[j];
                }
                dist2[far] = 0.0;
                had_empty = true;
            }
        }

        for (std::uint32_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                continue; // degenerate, keep previous centroid
            }
            const double inv = 1.0 / static_cast<double>(counts[c]);
            const double* s = sums.data() + static_cast<std::size_t>(c) * dim;
            float* dst = model.centroids.data() + static_cast<std::size_t>(c) * dim;
            for (std::uint32_t j = 0; j < dim; ++j) {
                dst[j] = static_cast<float>(s[j] * inv);
            }
        }
    }

    return model;
}

KMeansModel train_kmeans(const EmbeddingMatrix& data, std::uint32_t k,
                         int max_iters, std::uint64_t seed,
                         std::size_t threads) {
    if (data.count < k) {
        throw capacity_error("k-means needs at least k points: have " +
                             std::to_string(data.count) +
                             ", k=" + std::to_string(k));
    }
    KMeansOptions opts;
    opts.max_iters = max_iters;
    opts.seed = seed;
    opts.threads = threads;
    return train_kmeans_raw(data.values.data(), data.count, data.dim, k, opts);
}

std::pair<std::uint32_t, double> assign_nearest(const KMeansModel& model,
                                                const float* vec) {
    std::uint32_t best = 0;
    double best_d = sq_dist(vec, model.centroids.data(), model.dim);
    for (std::uint32_t c = 1; c < model.k; ++c) {
        const double d = sq_dist(
            vec, model.centroids.data() + static_cast<std::size_t>(c) * model.dim,
            model.dim);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return {best, best_d};
}

} // namespace marginmine
