#include "marginmine/pq.hpp"

#include "marginmine/errors.hpp"
#include "marginmine/kmeans.hpp"
#include "marginmine/parallel.hpp"

#include <cstring>

namespace marginmine {

ProductQuantizer train_pq_raw(const float* data, std::size_t n,
                              std::uint32_t dim, std::uint32_t m,
                              const PqTrainOptions& opts) {
    if (m == 0) {
        throw parameter_error("product quantizer needs m >= 1");
    }
    if (dim % m != 0) {
        throw shape_error("dim " + std::to_string(dim) +
                          " not divisible by m=" + std::to_string(m));
    }
    if (n == 0) {
        throw capacity_error("product quantizer needs training vectors");
    }

    ProductQuantizer pq;
    pq.m = m;
    pq.dim = dim;
    pq.dsub = dim / m;
    pq.ksub = n < 256 ? static_cast<std::uint32_t>(n) : 256;
    pq.ksub_reduced = pq.ksub < 256;
    pq.codebooks.assign(
        static_cast<std::size_t>(m) * pq.ksub * pq.dsub, 0.0f);

    const std::uint32_t dsub = pq.dsub;
    const std::uint32_t ksub = pq.ksub;

    parallel_for(m, opts.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<float> sub(n * dsub);
        for (std::size_t s = begin; s < end; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                std::memcpy(sub.data() + i * dsub,
                            data + i * dim + s * dsub, dsub * sizeof(float));
            }
            KMeansOptions ko;
            ko.max_iters = opts.max_iters;
            ko.seed = opts.seed + s;
            ko.threads = 1;
            KMeansModel model = train_kmeans_raw(sub.data(), n, dsub, ksub, ko);
            std::memcpy(pq.codebooks.data() +
                            s * static_cast<std::size_t>(ksub) * dsub,
                        model.centroids.data(),
                        static_cast<std::size_t>(ksub) * dsub * sizeof(float));
        }
    });

    return pq;
}

ProductQuantizer train_pq(const EmbeddingMatrix& data, std::uint32_t m,
                          std::uint64_t seed, int max_iters,
                          std::size_t threads) {
    PqTrainOptions opts;
    opts.max_iters = max_iters;
    opts.seed = seed;
    opts.threads = threads;
    return train_pq_raw(data.values.data(), data.count, data.dim, m, opts);
}

void pq_encode(const ProductQuantizer& pq, const float* vec,
               std::uint8_t* code) {
    for (std::uint32_t s = 0; s < pq.m; ++s) {
        const float* sub = vec + static_cast<std::size_t>(s) * pq.dsub;
        std::uint32_t best = 0;
        double best_d = 0.0;
        for (std::uint32_t j = 0; j < pq.ksub; ++j) {
            const float* cw = pq.codeword(s, j);
            double d = 0.0;
            for (std::uint32_t t = 0; t < pq.dsub; ++t) {
                const double diff = static_cast<double>(sub[t]) - cw[t];
                d += diff * diff;
            }
            if (j == 0 || d < best_d) {
                best_d = d;
                best = j;
            }
        }
        code[s] = static_cast<std::uint8_t>(best);
    }
}

std::vector<std::uint8_t> pq_encode(const ProductQuantizer& pq,
                                    std::span<const float> vec) {
    if (vec.size() != pq.dim) {
        throw shape_error("vector length " + std::to_string(vec.size()) +
                          " does not match quantizer dim " +
                          std::to_string(pq.dim));
    }
    std::vector<std::uint8_t> code(pq.m);
    pq_encode(pq, vec.data(), code.data());
    return code;
}

std::vector<std::uint8_t> pq_encode_all(const ProductQuantizer& pq,
                                        const float* data, std::size_t n,
                                        std::size_t threads) {
    std::vector<std::uint8_t> codes(n * pq.m);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            pq_encode(pq, data + i * pq.dim, codes.data() + i * pq.m);
        }
    });
    return codes;
}

std::vector<float> pq_decode(const ProductQuantizer& pq,
                             const std::uint8_t* code) {
    std::vector<float> out(pq.dim);
    for (std::uint32_t s = 0; s < pq.m; ++s) {
        std::memcpy(out.data() + static_cast<std::size_t>(s) * pq.dsub,
                    pq.codeword(s, code[s]), pq.dsub * sizeof(float));
    }
    return out;
}

} // namespace marginmine
