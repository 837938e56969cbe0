#pragma once

#include "marginmine/mining.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace marginmine {

struct GoldAlignment {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
};

// TSV loader: one "src_id<TAB>tgt_id" pair per line. Duplicate pairs and
// malformed lines are reported with their line number. When src_count or
// tgt_count is nonzero, ids are bounds-checked against it.
GoldAlignment load_gold(const std::filesystem::path& path,
                        std::uint64_t src_count = 0,
                        std::uint64_t tgt_count = 0);

struct PrfMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Set-overlap metrics. Conventions: an empty mined list has vacuous
// precision 1.0; an empty gold set has vacuous recall 1.0; f1 is 0 when
// precision + recall is 0.
PrfMetrics precision_recall(std::span<const MinedPair> mined,
                            const GoldAlignment& gold);

// Bounds-checked variant: any id at or above the given count on its side is
// a consistency error.
PrfMetrics precision_recall(std::span<const MinedPair> mined,
                            const GoldAlignment& gold,
                            std::uint64_t src_count, std::uint64_t tgt_count);

struct SweepRow {
    double threshold = 0.0;
    std::uint64_t pair_count = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Replays the greedy uniqueness filter at each threshold over the full
// (pre-threshold) candidate union. Thresholds must be ascending. Metrics
// are filled from gold when given, otherwise left at zero.
std::vector<SweepRow> threshold_sweep(std::span<const CandidatePair> candidates,
                                      const GoldAlignment* gold,
                                      std::span<const double> thresholds);

// TSV report: header "threshold\tcount\tprecision\trecall\tf1", all floats
// at 4 decimals.
void write_sweep_report(std::span<const SweepRow> rows,
                        const std::filesystem::path& path);

} // namespace marginmine
