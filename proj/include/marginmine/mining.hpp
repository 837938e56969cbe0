#pragma once

#include "marginmine/embeddings.hpp"
#include "marginmine/search.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace marginmine {

enum class Direction : std::uint8_t { forward = 0, backward = 1 };

enum class Backend { exact, ivfpq };

struct CandidatePair {
    std::uint64_t src_id = 0;
    std::uint64_t tgt_id = 0;
    double margin = 0.0;
    Direction direction = Direction::forward;
};

struct MinedPair {
    double margin = 0.0;
    std::uint64_t src_id = 0;
    std::uint64_t tgt_id = 0;
};

// Two output streams: pairs at or above the threshold, and the lower band
// [retain_floor, threshold) kept for optional use downstream.
struct MinedBitext {
    std::vector<MinedPair> primary;
    std::vector<MinedPair> secondary;
};

struct MiningConfig {
    std::uint32_t k = 4;
    double threshold = 1.04;
    double retain_floor = 1.02;
    Backend backend = Backend::exact;
    // ivfpq knobs; 0 picks the documented default for the corpus at hand.
    std::uint32_t nlist = 0;
    std::uint32_t m = 0;
    std::uint32_t nprobe = 0;
    int max_iters = 25;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

// Sentinel for a pair whose margin denominator is numerically unusable.
// Callers drop such pairs instead of ranking them.
inline constexpr double kMarginRejected =
    -std::numeric_limits<double>::infinity();

// margin = cos(x,y) / (mean(nn_x_sims)/2 + mean(nn_y_sims)/2), with each
// side averaged over its own list length. Returns kMarginRejected when the
// denominator's magnitude falls below 1e-9.
double margin_score(double cos_xy, std::span<const double> nn_x_sims,
                    std::span<const double> nn_y_sims);

// One candidate per query: the neighbor with the highest margin (ties to the
// lowest neighbor id). query_nn holds each query's neighbors in the other
// corpus; other_nn holds neighbor lists for that other corpus, needed for the
// denominator of the margin. Queries with no neighbors, or whose every margin
// is rejected, contribute nothing.
std::vector<CandidatePair> score_direction(const NeighborTable& query_nn,
                                           const NeighborTable& other_nn,
                                           Direction direction);

// Union of the two directional candidate lists. A pair proposed by both
// directions collapses to one entry keeping the larger margin. The result is
// sorted by (margin desc, src_id asc, tgt_id asc).
std::vector<CandidatePair> union_candidates(
    std::vector<CandidatePair> forward, std::vector<CandidatePair> backward);

// Runs neighbor search in both directions and returns the sorted candidate
// union, i.e. everything up to (but not including) the greedy/threshold
// stage. This is the input threshold sweeps replay.
std::vector<CandidatePair> score_candidates(const EmbeddingMatrix& l1,
                                            const EmbeddingMatrix& l2,
                                            const MiningConfig& config);

// Greedy 1:1 scan over a sorted candidate list: a pair is emitted only if
// neither side's id was emitted before, then routed by threshold.
MinedBitext select_pairs(std::span<const CandidatePair> candidates,
                         double threshold, double retain_floor);

MinedBitext mine(const EmbeddingMatrix& l1, const EmbeddingMatrix& l2,
                 const MiningConfig& config);

// One "%.6f\tL1 text\tL2 text" row per pair, in input order.
std::vector<std::string> attach_texts(std::span<const MinedPair> pairs,
                                      const SentenceTable& l1_texts,
                                      const SentenceTable& l2_texts);

// Writes the primary stream to `path` and the secondary stream to a sibling
// file named `path` + ".low" (always created, possibly empty).
void write_bitext(const MinedBitext& bitext, const SentenceTable& l1_texts,
                  const SentenceTable& l2_texts,
                  const std::filesystem::path& path);

// Binary candidate dump, round-trip exact. Layout: magic "CANDS001",
// u64 count, then per candidate u64 src, u64 tgt, f64 margin, u8 direction,
// all little-endian.
void write_candidates(std::span<const CandidatePair> candidates,
                      const std::filesystem::path& path);
std::vector<CandidatePair> load_candidates(const std::filesystem::path& path);

// Largest subquantizer count that keeps dim/m >= 4 (falls back to 1).
std::uint32_t default_m(std::uint32_t dim);

} // namespace marginmine
