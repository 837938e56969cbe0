#include "marginmine/mining.hpp"

#include "marginmine/errors.hpp"
#include "marginmine/ivfpq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_set>

namespace marginmine {

namespace {

bool candidate_rank(const CandidatePair& a, const CandidatePair& b) {
    if (a.margin != b.margin) {
        return a.margin > b.margin;
    }
    if (a.src_id != b.src_id) {
        return a.src_id < b.src_id;
    }
    return a.tgt_id < b.tgt_id;
}

std::vector<double> sims_of(const std::vector<Hit>& hits) {
    std::vector<double> sims;
    sims.reserve(hits.size());
    for (const auto& h : hits) {
        sims.push_back(h.sim);
    }
    return sims;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(std::istream& in, const std::string& what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw length_error("candidate file truncated reading " + what);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

constexpr char kCandMagic[8] = {'C', 'A', 'N', 'D', 'S', '0', '0', '1'};

} // namespace

double margin_score(double cos_xy, std::span<const double> nn_x_sims,
                    std::span<const double> nn_y_sims) {
    if (nn_x_sims.empty() || nn_y_sims.empty()) {
        throw shape_error("margin_score needs a non-empty neighbor list on "
                          "each side");
    }
    double sum_x = 0.0;
    for (const double s : nn_x_sims) {
        sum_x += s;
    }
    double sum_y = 0.0;
    for (const double s : nn_y_sims) {
        sum_y += s;
    }
    const double denom =
        sum_x / (2.0 * static_cast<double>(nn_x_sims.size())) +
        sum_y / (2.0 * static_cast<double>(nn_y_sims.size()));
    if (std::fabs(denom) < 1e-9) {
        return kMarginRejected;
    }
    return cos_xy / denom;
}

std::vector<CandidatePair> score_direction(const NeighborTable& query_nn,
                                           const NeighborTable& other_nn,
                                           Direction direction) {
    std::vector<CandidatePair> out;
    out.reserve(query_nn.size());
    std::vector<double> query_sims;
    for (std::size_t q = 0; q < query_nn.size(); ++q) {
        const auto& hits = query_nn[q];
        if (hits.empty()) {
            continue;
        }
        query_sims.clear();
        for (const auto& h : hits) {
            query_sims.push_back(h.sim);
        }
        bool found = false;
        double best_margin = 0.0;
        std::uint64_t best_id = 0;
        for (const auto& h : hits) {
            if (h.id >= other_nn.size()) {
                throw consistency_error(
                    "neighbor id " + std::to_string(h.id) +
                    " has no reverse neighbor list");
            }
            const std::vector<double> other_sims = sims_of(other_nn[h.id]);
            if (other_sims.empty()) {
                continue;
            }
            const double m = margin_score(h.sim, query_sims, other_sims);
            if (m == kMarginRejected) {
                continue;
            }
            if (!found || m > best_margin ||
                (m == best_margin && h.id < best_id)) {
                found = true;
                best_margin = m;
                best_id = h.id;
            }
        }
        if (!found) {
            continue;
        }
        CandidatePair c;
        c.margin = best_margin;
        c.direction = direction;
        if (direction == Direction::forward) {
            c.src_id = q;
            c.tgt_id = best_id;
        } else {
            c.src_id = best_id;
            c.tgt_id = q;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<CandidatePair> union_candidates(
    std::vector<CandidatePair> forward, std::vector<CandidatePair> backward) {
    std::vector<CandidatePair> all = std::move(forward);
    all.insert(all.end(), backward.begin(), backward.end());

    // Group duplicates of the same (src, tgt) pair, keeping the larger
    // margin; on an exact tie the forward entry wins so the dump stays
    // deterministic.
    std::sort(all.begin(), all.end(),
              [](const CandidatePair& a, const CandidatePair& b) {
                  if (a.src_id != b.src_id) {
                      return a.src_id < b.src_id;
                  }
                  if (a.tgt_id != b.tgt_id) {
                      return a.tgt_id < b.tgt_id;
                  }
                  if (a.margin != b.margin) {
                      return a.margin > b.margin;
                  }
                  return a.direction < b.direction;
              });
    all.erase(std::unique(all.begin(), all.end(),
                          [](const CandidatePair& a, const CandidatePair& b) {
                              return a.src_id == b.src_id &&
                                     a.tgt_id == b.tgt_id;
                          }),
              all.end());

    std::sort(all.begin(), all.end(), candidate_rank);
    return all;
}

std::uint32_t default_m(std::uint32_t dim) {
    for (std::uint32_t m = dim / 4; m >= 1; --m) {
        if (dim % m == 0) {
            return m;
        }
    }
    return 1;
}

std::vector<CandidatePair> score_candidates(const EmbeddingMatrix& l1,
                                            const EmbeddingMatrix& l2,
                                            const MiningConfig& config) {
    if (l1.dim != l2.dim) {
        throw shape_error("corpus dims differ: " + std::to_string(l1.dim) +
                          " vs " + std::to_string(l2.dim));
    }
    if (!l1.normalized || !l2.normalized) {
        throw data_error("mining requires normalized matrices");
    }
    if (config.k < 1) {
        throw parameter_error("mining needs k >= 1");
    }
    if (l1.count == 0 || l2.count == 0) {
        return {};
    }

    const std::uint32_t k_fwd = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(config.k, l2.count));
    const std::uint32_t k_bwd = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(config.k, l1.count));

    NeighborTable fwd_nn;
    NeighborTable bwd_nn;
    if (config.backend == Backend::exact) {
        fwd_nn = search_exact(l2, l1, k_fwd, config.threads);
        bwd_nn = search_exact(l1, l2, k_bwd, config.threads);
    } else {
        const std::uint32_t m =
            config.m != 0 ? config.m : default_m(l1.dim);
        IndexBuildOptions build_opts;
        build_opts.max_iters = config.max_iters;
        build_opts.threads = config.threads;

        const std::uint32_t nlist_tgt =
            config.nlist != 0 ? config.nlist : default_nlist(l2.count);
        const std::uint32_t nlist_src =
            config.nlist != 0 ? config.nlist : default_nlist(l1.count);
        const IvfPqIndex idx_tgt =
            build_index(l2, nlist_tgt, m, config.seed, build_opts);
        const IvfPqIndex idx_src =
            build_index(l1, nlist_src, m, config.seed, build_opts);

        const std::uint32_t nprobe_tgt =
            config.nprobe != 0 ? config.nprobe
                               : std::max<std::uint32_t>(1, nlist_tgt / 4);
        const std::uint32_t nprobe_src =
            config.nprobe != 0 ? config.nprobe
                               : std::max<std::uint32_t>(1, nlist_src / 4);
        fwd_nn = search_ivfpq(idx_tgt, l1, k_fwd, nprobe_tgt, config.threads);
        bwd_nn = search_ivfpq(idx_src, l2, k_bwd, nprobe_src, config.threads);
    }

    auto fwd = score_direction(fwd_nn, bwd_nn, Direction::forward);
    auto bwd = score_direction(bwd_nn, fwd_nn, Direction::backward);
    return union_candidates(std::move(fwd), std::move(bwd));
}

MinedBitext select_pairs(std::span<const CandidatePair> candidates,
                         double threshold, double retain_floor) {
    if (retain_floor > threshold) {
        throw parameter_error("retain_floor must not exceed threshold");
    }
    MinedBitext out;
    std::unordered_set<std::uint64_t> used_src;
    std::unordered_set<std::uint64_t> used_tgt;
    for (const auto& c : candidates) {
        // Sorted by margin descending, so nothing past this point can reach
        // either stream.
        if (!(c.margin >= retain_floor)) {
            break;
        }
        if (used_src.count(c.src_id) != 0 || used_tgt.count(c.tgt_id) != 0) {
            continue;
        }
        used_src.insert(c.src_id);
        used_tgt.insert(c.tgt_id);
        if (c.margin >= threshold) {
            out.primary.push_back({c.margin, c.src_id, c.tgt_id});
        } else {
            out.secondary.push_back({c.margin, c.src_id, c.tgt_id});
        }
    }
    return out;
}

MinedBitext mine(const EmbeddingMatrix& l1, const EmbeddingMatrix& l2,
                 const MiningConfig& config) {
    if (config.retain_floor > config.threshold) {
        throw parameter_error("retain_floor must not exceed threshold");
    }
    const std::vector<CandidatePair> candidates =
        score_candidates(l1, l2, config);
    return select_pairs(candidates, config.threshold, config.retain_floor);
}

std::vector<std::string> attach_texts(std::span<const MinedPair> pairs,
                                      const SentenceTable& l1_texts,
                                      const SentenceTable& l2_texts) {
    std::vector<std::string> rows;
    rows.reserve(pairs.size());
    char margin_buf[64];
    for (const auto& p : pairs) {
        if (p.src_id >= l1_texts.texts.size()) {
            throw consistency_error("mined src id " +
                                    std::to_string(p.src_id) +
                                    " is outside the L1 sentence table");
        }
        if (p.tgt_id >= l2_texts.texts.size()) {
            throw consistency_error("mined tgt id " +
                                    std::to_string(p.tgt_id) +
                                    " is outside the L2 sentence table");
        }
        std::snprintf(margin_buf, sizeof(margin_buf), "%.6f", p.margin);
        std::string row = margin_buf;
        row += '\t';
        row += l1_texts.texts[p.src_id];
        row += '\t';
        row += l2_texts.texts[p.tgt_id];
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_bitext(const MinedBitext& bitext, const SentenceTable& l1_texts,
                  const SentenceTable& l2_texts,
                  const std::filesystem::path& path) {
    const auto write_rows = [&](const std::vector<MinedPair>& pairs,
                                const std::filesystem::path& target) {
        std::ofstream out(target, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw io_error("cannot open bitext output: " + target.string());
        }
        for (const auto& row : attach_texts(pairs, l1_texts, l2_texts)) {
            out << row << '\n';
        }
        out.flush();
        if (!out) {
            throw io_error("failed writing bitext to " + target.string());
        }
    };
    write_rows(bitext.primary, path);
    std::filesystem::path low = path;
    low += ".low";
    write_rows(bitext.secondary, low);
}

void write_candidates(std::span<const CandidatePair> candidates,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open candidate dump: " + path.string());
    }
    out.write(kCandMagic, 8);
    write_u64_le(out, candidates.size());
    static_assert(sizeof(double) == 8, "double must be IEEE-754 binary64");
    for (const auto& c : candidates) {
        write_u64_le(out, c.src_id);
        write_u64_le(out, c.tgt_id);
        std::uint64_t bits;
        std::memcpy(&bits, &c.margin, 8);
        write_u64_le(out, bits);
        const char dir = static_cast<char>(c.direction);
        out.write(&dir, 1);
    }
    out.flush();
    if (!out) {
        throw io_error("failed writing candidates to " + path.string());
    }
}

std::vector<CandidatePair> load_candidates(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open candidate dump: " + path.string());
    }
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kCandMagic, 8) != 0) {
        throw format_error("bad candidate-dump magic in " + path.string());
    }
    const std::uint64_t n = read_u64_le(in, "count");
    std::vector<CandidatePair> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        CandidatePair c;
        c.src_id = read_u64_le(in, "src id");
        c.tgt_id = read_u64_le(in, "tgt id");
        const std::uint64_t bits = read_u64_le(in, "margin");
        std::memcpy(&c.margin, &bits, 8);
        char dir;
        if (!in.read(&dir, 1)) {
            throw length_error("candidate file truncated reading direction");
        }
        if (dir != 0 && dir != 1) {
            throw format_error("candidate direction byte out of range in " +
                               path.string());
        }
        c.direction = static_cast<Direction>(dir);
        out.push_back(c);
    }
    in.peek();
    if (!in.eof()) {
        throw length_error("trailing bytes after candidate payload in " +
                           path.string());
    }
    return out;
}

} // namespace marginmine
