#pragma once

#include "marginmine/embeddings.hpp"

#include <cstdint>
#include <vector>

namespace marginmine {

// Product quantizer: m independent codebooks of ksub codewords over
// dim/m-dimensional subvectors. ksub is 256 so each code unit is one byte;
// it is reduced (with a warning recorded) when the training set is smaller.
struct ProductQuantizer {
    std::uint32_t m = 0;
    std::uint32_t ksub = 0;
    std::uint32_t dim = 0;
    std::uint32_t dsub = 0;
    std::vector<float> codebooks; // m * ksub * dsub
    bool ksub_reduced = false;

    const float* codeword(std::uint32_t sub, std::uint32_t code) const {
        return codebooks.data() +
               (static_cast<std::size_t>(sub) * ksub + code) * dsub;
    }
};

struct PqTrainOptions {
    int max_iters = 25;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

ProductQuantizer train_pq_raw(const float* data, std::size_t n,
                              std::uint32_t dim, std::uint32_t m,
                              const PqTrainOptions& opts);

ProductQuantizer train_pq(const EmbeddingMatrix& data, std::uint32_t m,
                          std::uint64_t seed, int max_iters = 25,
                          std::size_t threads = 1);

// Byte j is the index of the nearest codeword in subspace j (squared
// Euclidean, ties to the lowest index).
void pq_encode(const ProductQuantizer& pq, const float* vec,
               std::uint8_t* code);

// Length-checked variant; the vector must have exactly pq.dim entries.
std::vector<std::uint8_t> pq_encode(const ProductQuantizer& pq,
                                    std::span<const float> vec);

std::vector<std::uint8_t> pq_encode_all(const ProductQuantizer& pq,
                                        const float* data, std::size_t n,
                                        std::size_t threads = 1);

std::vector<float> pq_decode(const ProductQuantizer& pq,
                             const std::uint8_t* code);

} // namespace marginmine
