#include "marginmine/pq.hpp"
#include "marginmine/errors.hpp"

#include "testutil.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace marginmine;

TEST_CASE("subquantizer layout follows dim and m") {
    EmbeddingMatrix data = testutil::random_unit_matrix(8, 300, 31);
    ProductQuantizer pq = train_pq(data, 2, 7);
    CHECK(pq.m == 2);
    CHECK(pq.dsub == 4);
    CHECK(pq.ksub == 256);
    CHECK_FALSE(pq.ksub_reduced);
    CHECK(pq.codebooks.size() == 2u * 256u * 4u);

    auto codes = pq_encode_all(pq, data.values.data(), data.count);
    CHECK(codes.size() == data.count * 2);
}

TEST_CASE("dim not divisible by m is rejected") {
    EmbeddingMatrix data = testutil::random_unit_matrix(10, 20, 3);
    CHECK_THROWS_AS(train_pq(data, 4, 0), shape_error);
    CHECK_THROWS_AS(train_pq(data, 0, 0), parameter_error);
}

TEST_CASE("small training sets shrink the codebook") {
    EmbeddingMatrix data = testutil::random_unit_matrix(8, 10, 3);
    ProductQuantizer pq = train_pq(data, 2, 7);
    CHECK(pq.ksub == 10);
    CHECK(pq.ksub_reduced);
}

TEST_CASE("repeated distinct vectors quantize with zero error") {
    // 64 distinct points, each repeated 4 times; with <=256 codewords per
    // subspace the training set is exactly representable, and a mean over
    // four identical floats is exact, so reconstruction must be lossless.
    const std::uint32_t dim = 4;
    EmbeddingMatrix base = testutil::random_unit_matrix(dim, 64, 5);
    std::vector<float> values;
    for (std::size_t i = 0; i < base.count; ++i) {
        for (int rep = 0; rep < 4; ++rep) {
            const float* row = base.values.data() + i * dim;
            values.insert(values.end(), row, row + dim);
        }
    }
    EmbeddingMatrix data = make_matrix(dim, 256, std::move(values));

    ProductQuantizer pq = train_pq(data, 2, 9);
    double worst = 0.0;
    for (std::size_t i = 0; i < data.count; ++i) {
        const float* row = data.values.data() + i * dim;
        auto code = pq_encode(pq, std::span<const float>(row, dim));
        auto rec = pq_decode(pq, code.data());
        double err = 0.0;
        for (std::uint32_t j = 0; j < dim; ++j) {
            const double d = static_cast<double>(row[j]) - rec[j];
            err += d * d;
        }
        worst = std::max(worst, err);
    }
    CHECK(worst <= 1e-18);
}

TEST_CASE("encode picks the exact codeword when one matches") {
    EmbeddingMatrix data = testutil::random_unit_matrix(8, 300, 13);
    ProductQuantizer pq = train_pq(data, 2, 1);
    // build a vector from codewords 3 and 7 directly
    std::vector<float> vec(8);
    std::memcpy(vec.data(), pq.codeword(0, 3), 4 * sizeof(float));
    std::memcpy(vec.data() + 4, pq.codeword(1, 7), 4 * sizeof(float));
    auto code = pq_encode(pq, std::span<const float>(vec.data(), 8));
    REQUIRE(code.size() == 2);
    CHECK(code[0] == 3);
    CHECK(code[1] == 7);
}

TEST_CASE("encode breaks distance ties toward the lower code") {
    ProductQuantizer pq;
    pq.m = 1;
    pq.ksub = 2;
    pq.dim = 1;
    pq.dsub = 1;
    pq.codebooks = {-1.0f, 1.0f};
    const float mid = 0.0f;
    std::uint8_t code = 255;
    pq_encode(pq, &mid, &code);
    CHECK(code == 0);
}

TEST_CASE("encode rejects mismatched vector length") {
    EmbeddingMatrix data = testutil::random_unit_matrix(8, 40, 3);
    ProductQuantizer pq = train_pq(data, 2, 7);
    std::vector<float> wrong(6, 0.0f);
    CHECK_THROWS_AS(pq_encode(pq, std::span<const float>(wrong)), shape_error);
}

TEST_CASE("training is deterministic for a fixed seed") {
    EmbeddingMatrix data = testutil::random_unit_matrix(8, 400, 21);
    ProductQuantizer a = train_pq(data, 2, 42);
    ProductQuantizer b = train_pq(data, 2, 42, 25, 4);
    CHECK(a.codebooks == b.codebooks);
    ProductQuantizer c = train_pq(data, 2, 43);
    CHECK(a.codebooks != c.codebooks);
}

TEST_CASE("decode reassembles the selected codewords") {
    EmbeddingMatrix data = testutil::random_unit_matrix(8, 300, 11);
    ProductQuantizer pq = train_pq(data, 4, 2);
    std::uint8_t code[4] = {1, 2, 3, 4};
    auto rec = pq_decode(pq, code);
    REQUIRE(rec.size() == 8);
    for (std::uint32_t s = 0; s < 4; ++s) {
        const float* cw = pq.codeword(s, code[s]);
        CHECK(rec[s * 2] == cw[0]);
        CHECK(rec[s * 2 + 1] == cw[1]);
    }
}
