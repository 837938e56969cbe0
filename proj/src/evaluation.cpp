#include "marginmine/evaluation.hpp"

#include "marginmine/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

namespace marginmine {

namespace {

std::uint64_t parse_id(const std::string& field, std::size_t line_no,
                       const std::filesystem::path& path) {
    if (field.empty()) {
        throw format_error("gold file " + path.string() + " line " +
                           std::to_string(line_no) + ": empty id field");
    }
    std::uint64_t value = 0;
    for (const char ch : field) {
        if (ch < '0' || ch > '9') {
            throw format_error("gold file " + path.string() + " line " +
                               std::to_string(line_no) +
                               ": id is not a non-negative integer: '" +
                               field + "'");
        }
        value = value * 10 + static_cast<std::uint64_t>(ch - '0');
    }
    return value;
}

} // namespace

GoldAlignment load_gold(const std::filesystem::path& path,
                        std::uint64_t src_count, std::uint64_t tgt_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open gold file: " + path.string());
    }
    GoldAlignment gold;
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos ||
            line.find('\t', tab + 1) != std::string::npos) {
            throw format_error("gold file " + path.string() + " line " +
                               std::to_string(line_no) +
                               ": expected exactly two tab-separated ids");
        }
        const std::uint64_t src =
            parse_id(line.substr(0, tab), line_no, path);
        const std::uint64_t tgt =
            parse_id(line.substr(tab + 1), line_no, path);
        if (src_count != 0 && src >= src_count) {
            throw consistency_error(
                "gold file " + path.string() + " line " +
                std::to_string(line_no) + ": src id " + std::to_string(src) +
                " is outside the corpus (count " +
                std::to_string(src_count) + ")");
        }
        if (tgt_count != 0 && tgt >= tgt_count) {
            throw consistency_error(
                "gold file " + path.string() + " line " +
                std::to_string(line_no) + ": tgt id " + std::to_string(tgt) +
                " is outside the corpus (count " +
                std::to_string(tgt_count) + ")");
        }
        if (!seen.insert({src, tgt}).second) {
            throw format_error("gold file " + path.string() + " line " +
                               std::to_string(line_no) + ": duplicate pair " +
                               std::to_string(src) + "\t" +
                               std::to_string(tgt));
        }
        gold.pairs.emplace_back(src, tgt);
    }
    return gold;
}

PrfMetrics precision_recall(std::span<const MinedPair> mined,
                            const GoldAlignment& gold) {
    std::set<std::pair<std::uint64_t, std::uint64_t>> gold_set(
        gold.pairs.begin(), gold.pairs.end());
    std::size_t hits = 0;
    for (const auto& p : mined) {
        if (gold_set.count({p.src_id, p.tgt_id}) != 0) {
            ++hits;
        }
    }
    PrfMetrics out;
    out.precision = mined.empty()
                        ? 1.0
                        : static_cast<double>(hits) /
                              static_cast<double>(mined.size());
    out.recall = gold_set.empty()
                     ? 1.0
                     : static_cast<double>(hits) /
                           static_cast<double>(gold_set.size());
    const double pr = out.precision + out.recall;
    out.f1 = pr == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / pr;
    return out;
}

PrfMetrics precision_recall(std::span<const MinedPair> mined,
                            const GoldAlignment& gold,
                            std::uint64_t src_count, std::uint64_t tgt_count) {
    for (const auto& p : mined) {
        if (p.src_id >= src_count || p.tgt_id >= tgt_count) {
            throw consistency_error(
                "mined pair (" + std::to_string(p.src_id) + ", " +
                std::to_string(p.tgt_id) + ") is outside the corpora");
        }
    }
    for (const auto& [src, tgt] : gold.pairs) {
        if (src >= src_count || tgt >= tgt_count) {
            throw consistency_error("gold pair (" + std::to_string(src) +
                                    ", " + std::to_string(tgt) +
                                    ") is outside the corpora");
        }
    }
    return precision_recall(mined, gold);
}

std::vector<SweepRow> threshold_sweep(
    std::span<const CandidatePair> candidates, const GoldAlignment* gold,
    std::span<const double> thresholds) {
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (thresholds[i] < thresholds[i - 1]) {
            throw parameter_error("sweep thresholds must be ascending");
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (const double t : thresholds) {
        const MinedBitext selected = select_pairs(candidates, t, t);
        SweepRow row;
        row.threshold = t;
        row.pair_count = selected.primary.size();
        if (gold != nullptr) {
            const PrfMetrics m = precision_recall(selected.primary, *gold);
            row.precision = m.precision;
            row.recall = m.recall;
            row.f1 = m.f1;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_report(std::span<const SweepRow> rows,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open sweep report: " + path.string());
    }
    out << "threshold\tcount\tprecision\trecall\tf1\n";
    char buf[160];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.4f\t%llu\t%.4f\t%.4f\t%.4f\n",
                      row.threshold,
                      static_cast<unsigned long long>(row.pair_count),
                      row.precision, row.recall, row.f1);
        out << buf;
    }
    out.flush();
    if (!out) {
        throw io_error("failed writing sweep report to " + path.string());
    }
}

} // namespace marginmine
