#include "marginmine/ivfpq.hpp"

#include "marginmine/errors.hpp"
#include "marginmine/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace marginmine {

namespace {

void rotate_into(const std::vector<float>& rotation, std::uint32_t dim,
                 const float* in, float* out) {
    for (std::uint32_t r = 0; r < dim; ++r) {
        const float* row = rotation.data() + static_cast<std::size_t>(r) * dim;
        double acc = 0.0;
        for (std::uint32_t c = 0; c < dim; ++c) {
            acc += static_cast<double>(row[c]) * in[c];
        }
        out[r] = static_cast<float>(acc);
    }
}

bool hit_before(const Hit& a, const Hit& b) {
    if (a.sim != b.sim) {
        return a.sim > b.sim;
    }
    return a.id < b.id;
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32_le(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw length_error("index file truncated reading " + what);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
}

std::uint64_t read_u64_le(std::istream& in, const std::string& what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw length_error("index file truncated reading " + what);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

void write_f32_block(std::ostream& out, const float* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(n * sizeof(float)));
}

void read_f32_block(std::istream& in, float* data, std::size_t n,
                    const std::string& what) {
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float)) {
        throw length_error("index file truncated reading " + what);
    }
}

constexpr char kMagic[8] = {'I', 'V', 'F', 'P', 'Q', '0', '0', '1'};

bool is_identity_rotation(const std::vector<float>& rotation,
                          std::uint32_t dim) {
    if (rotation.empty()) {
        return true;
    }
    for (std::uint32_t r = 0; r < dim; ++r) {
        for (std::uint32_t c = 0; c < dim; ++c) {
            const float expect = r == c ? 1.0f : 0.0f;
            if (rotation[static_cast<std::size_t>(r) * dim + c] != expect) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

IvfPqIndex build_index(const EmbeddingMatrix& data, std::uint32_t nlist,
                       std::uint32_t m, std::uint64_t seed,
                       const IndexBuildOptions& opts) {
    if (!data.normalized) {
        throw data_error("index build requires a normalized matrix");
    }
    if (nlist == 0) {
        throw parameter_error("index needs nlist >= 1");
    }
    if (data.count < nlist) {
        throw capacity_error("index needs count >= nlist: have " +
                             std::to_string(data.count) +
                             ", nlist=" + std::to_string(nlist));
    }
    if (!opts.rotation.empty() &&
        opts.rotation.size() !=
            static_cast<std::size_t>(data.dim) * data.dim) {
        throw shape_error("rotation must be dim*dim");
    }

    IvfPqIndex index;
    index.dim = data.dim;
    index.nlist = nlist;
    index.m = m;
    index.count = data.count;
    index.rotation = opts.rotation;

    // Pre-transform hook. Identity by default; a non-identity rotation is
    // applied to every vector before coarse assignment and PQ.
    const float* vecs = data.values.data();
    std::vector<float> rotated;
    if (!is_identity_rotation(index.rotation, index.dim)) {
        rotated.resize(data.values.size());
        parallel_for(data.count, opts.threads,
                     [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                rotate_into(index.rotation, index.dim,
                            data.values.data() + i * index.dim,
                            rotated.data() + i * index.dim);
            }
        });
        vecs = rotated.data();
    }

    KMeansOptions ko;
    ko.max_iters = opts.max_iters;
    ko.seed = seed;
    ko.threads = opts.threads;
    index.coarse = train_kmeans_raw(vecs, data.count, index.dim, nlist, ko);

    std::vector<std::uint32_t> assign(data.count);
    std::vector<float> residuals(data.values.size());
    parallel_for(data.count, opts.threads,
                 [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const float* x = vecs + i * index.dim;
            const auto [cell, d2] = assign_nearest(index.coarse, x);
            (void)d2;
            assign[i] = cell;
            const float* c = index.coarse.centroids.data() +
                             static_cast<std::size_t>(cell) * index.dim;
            float* r = residuals.data() + i * index.dim;
            for (std::uint32_t j = 0; j < index.dim; ++j) {
                r[j] = x[j] - c[j];
            }
        }
    });

    PqTrainOptions po;
    po.max_iters = opts.max_iters;
    po.seed = seed + 1;
    po.threads = opts.threads;
    index.pq = train_pq_raw(residuals.data(), data.count, index.dim, m, po);
    index.ksub = index.pq.ksub;

    std::vector<std::uint8_t> codes =
        pq_encode_all(index.pq, residuals.data(), data.count, opts.threads);

    index.list_ids.assign(nlist, {});
    index.list_codes.assign(nlist, {});
    for (std::size_t i = 0; i < data.count; ++i) {
        const std::uint32_t cell = assign[i];
        index.list_ids[cell].push_back(static_cast<std::uint64_t>(i));
        index.list_codes[cell].insert(index.list_codes[cell].end(),
                                      codes.begin() + i * m,
                                      codes.begin() + (i + 1) * m);
    }

    return index;
}

NeighborTable search_ivfpq(const IvfPqIndex& index,
                           const EmbeddingMatrix& queries, std::uint32_t k,
                           std::uint32_t nprobe, std::size_t threads) {
    if (k == 0) {
        throw parameter_error("search needs k >= 1");
    }
    if (nprobe < 1 || nprobe > index.nlist) {
        throw parameter_error("nprobe must be in [1, nlist]: got " +
                              std::to_string(nprobe) +
                              ", nlist=" + std::to_string(index.nlist));
    }
    if (queries.dim != index.dim) {
        throw shape_error("query dim " + std::to_string(queries.dim) +
                          " does not match index dim " +
                          std::to_string(index.dim));
    }
    if (!queries.normalized) {
        throw data_error("ivfpq search requires normalized queries");
    }

    const bool rotate = !is_identity_rotation(index.rotation, index.dim);
    const std::uint32_t dim = index.dim;
    const std::uint32_t m = index.m;
    const std::uint32_t ksub = index.pq.ksub;
    const std::uint32_t dsub = index.pq.dsub;

    NeighborTable table(queries.count);

    parallel_for(queries.count, threads,
                 [&](std::size_t begin, std::size_t end) {
        std::vector<float> qbuf(dim);
        std::vector<std::pair<double, std::uint32_t>> cells(index.nlist);
        std::vector<float> residual(dim);
        std::vector<double> lut(static_cast<std::size_t>(m) * ksub);
        std::vector<Hit> heap;

        for (std::size_t q = begin; q < end; ++q) {
            const float* qv = queries.values.data() + q * dim;
            if (rotate) {
                rotate_into(index.rotation, dim, qv, qbuf.data());
                qv = qbuf.data();
            }

            for (std::uint32_t c = 0; c < index.nlist; ++c) {
                const float* cv = index.coarse.centroids.data() +
                                  static_cast<std::size_t>(c) * dim;
                double d = 0.0;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    const double diff = static_cast<double>(qv[j]) - cv[j];
                    d += diff * diff;
                }
                cells[c] = {d, c};
            }
            std::partial_sort(cells.begin(), cells.begin() + nprobe,
                              cells.end());

            heap.clear();
            // worst element first: lowest sim, then highest id
            auto worse = [](const Hit& a, const Hit& b) {
                if (a.sim != b.sim) {
                    return a.sim > b.sim;
                }
                return a.id < b.id;
            };

            for (std::uint32_t p = 0; p < nprobe; ++p) {
                const std::uint32_t cell = cells[p].second;
                const auto& ids = index.list_ids[cell];
                if (ids.empty()) {
                    continue;
                }
                const float* cv = index.coarse.centroids.data() +
                                  static_cast<std::size_t>(cell) * dim;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    residual[j] = qv[j] - cv[j];
                }
                for (std::uint32_t s = 0; s < m; ++s) {
                    const float* sub =
                        residual.data() + static_cast<std::size_t>(s) * dsub;
                    for (std::uint32_t cw = 0; cw < ksub; ++cw) {
                        const float* code_vec = index.pq.codeword(s, cw);
                        double d = 0.0;
                        for (std::uint32_t t = 0; t < dsub; ++t) {
                            const double diff =
                                static_cast<double>(sub[t]) - code_vec[t];
                            d += diff * diff;
                        }
                        lut[static_cast<std::size_t>(s) * ksub + cw] = d;
                    }
                }
                const std::uint8_t* codes = index.list_codes[cell].data();
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    const std::uint8_t* code = codes + i * m;
                    double d2 = 0.0;
                    for (std::uint32_t s = 0; s < m; ++s) {
                        d2 += lut[static_cast<std::size_t>(s) * ksub + code[s]];
                    }
                    const Hit hit{ids[i], 1.0 - d2 / 2.0};
                    if (heap.size() < k) {
                        heap.push_back(hit);
                        std::push_heap(heap.begin(), heap.end(), worse);
                    } else if (worse(hit, heap.front())) {
                        std::pop_heap(heap.begin(), heap.end(), worse);
                        heap.back() = hit;
                        std::push_heap(heap.begin(), heap.end(), worse);
                    }
                }
            }

            auto& out = table[q];
            out.assign(heap.begin(), heap.end());
            std::sort(out.begin(), out.end(), hit_before);
        }
    });

    return table;
}

void save_index(const IvfPqIndex& index, const std::filesystem::path& path) {
    if (!is_identity_rotation(index.rotation, index.dim)) {
        throw config_error(
            "only identity-rotation indexes can be serialized");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open index file for writing: " + path.string());
    }
    out.write(kMagic, 8);
    write_u32_le(out, index.dim);
    write_u32_le(out, index.nlist);
    write_u32_le(out, index.m);
    write_u32_le(out, index.ksub);
    write_u64_le(out, index.count);
    write_f32_block(out, index.coarse.centroids.data(),
                    index.coarse.centroids.size());
    write_f32_block(out, index.pq.codebooks.data(), index.pq.codebooks.size());
    for (std::uint32_t c = 0; c < index.nlist; ++c) {
        const auto& ids = index.list_ids[c];
        write_u64_le(out, ids.size());
        for (const auto id : ids) {
            write_u64_le(out, id);
        }
        const auto& codes = index.list_codes[c];
        out.write(reinterpret_cast<const char*>(codes.data()),
                  static_cast<std::streamsize>(codes.size()));
    }
    out.flush();
    if (!out) {
        throw io_error("failed writing index to " + path.string());
    }
}

IvfPqIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open index file: " + path.string());
    }
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw format_error("bad index magic in " + path.string());
    }
    IvfPqIndex index;
    index.dim = read_u32_le(in, "dim");
    index.nlist = read_u32_le(in, "nlist");
    index.m = read_u32_le(in, "m");
    index.ksub = read_u32_le(in, "ksub");
    index.count = read_u64_le(in, "count");
    if (index.dim == 0 || index.nlist == 0 || index.m == 0 ||
        index.ksub == 0 || index.ksub > 256 || index.dim % index.m != 0) {
        throw format_error("inconsistent index header in " + path.string());
    }

    index.coarse.k = index.nlist;
    index.coarse.dim = index.dim;
    index.coarse.centroids.resize(static_cast<std::size_t>(index.nlist) *
                                  index.dim);
    read_f32_block(in, index.coarse.centroids.data(),
                   index.coarse.centroids.size(), "coarse centroids");

    index.pq.m = index.m;
    index.pq.ksub = index.ksub;
    index.pq.dim = index.dim;
    index.pq.dsub = index.dim / index.m;
    index.pq.ksub_reduced = index.ksub < 256;
    index.pq.codebooks.resize(static_cast<std::size_t>(index.m) * index.ksub *
                              index.pq.dsub);
    read_f32_block(in, index.pq.codebooks.data(), index.pq.codebooks.size(),
                   "codebooks");

    index.list_ids.assign(index.nlist, {});
    index.list_codes.assign(index.nlist, {});
    std::uint64_t total = 0;
    for (std::uint32_t c = 0; c < index.nlist; ++c) {
        const std::uint64_t len = read_u64_le(in, "list length");
        total += len;
        if (total > index.count) {
            throw format_error("inverted lists exceed declared count in " +
                               path.string());
        }
        auto& ids = index.list_ids[c];
        ids.resize(len);
        for (std::uint64_t i = 0; i < len; ++i) {
            ids[i] = read_u64_le(in, "list id");
        }
        auto& codes = index.list_codes[c];
        codes.resize(len * index.m);
        in.read(reinterpret_cast<char*>(codes.data()),
                static_cast<std::streamsize>(codes.size()));
        if (static_cast<std::size_t>(in.gcount()) != codes.size()) {
            throw length_error("index file truncated reading codes in " +
                               path.string());
        }
    }
    if (total != index.count) {
        throw format_error("inverted lists hold " + std::to_string(total) +
                           " ids, header declares " +
                           std::to_string(index.count) + " in " +
                           path.string());
    }
    in.peek();
    if (!in.eof()) {
        throw length_error("trailing bytes after index payload in " +
                           path.string());
    }
    return index;
}

IndexStats index_stats(const IvfPqIndex& index) {
    IndexStats stats;
    stats.raw_vector_bytes =
        index.count * static_cast<std::uint64_t>(index.dim) * sizeof(float);
    stats.code_bytes = index.count * static_cast<std::uint64_t>(index.m);
    stats.id_bytes = index.count * 8ull;
    stats.overhead_bytes =
        8 /* magic */ + 4 * 4 /* dims */ + 8 /* count */ +
        static_cast<std::uint64_t>(index.coarse.centroids.size()) *
            sizeof(float) +
        static_cast<std::uint64_t>(index.pq.codebooks.size()) * sizeof(float) +
        static_cast<std::uint64_t>(index.nlist) * 8 /* list lengths */;
    return stats;
}

std::uint32_t default_nlist(std::size_t count) {
    if (count == 0) {
        return 1;
    }
    const double root = std::sqrt(static_cast<double>(count));
    std::uint64_t nlist = static_cast<std::uint64_t>(std::ceil(4.0 * root));
    if (nlist < 1) {
        nlist = 1;
    }
    if (nlist > count) {
        nlist = count;
    }
    return static_cast<std::uint32_t>(nlist);
}

} // namespace marginmine
