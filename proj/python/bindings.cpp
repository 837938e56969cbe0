// Python bindings for the main mining operations. Embedding matrices cross
// the boundary as 2-d float32 numpy arrays (rows are sentences); functions
// that need unit vectors normalize their own copy, so callers can pass raw
// encoder output.

#include "marginmine/corpus.hpp"
#include "marginmine/embeddings.hpp"
#include "marginmine/evaluation.hpp"
#include "marginmine/lid.hpp"
#include "marginmine/mining.hpp"
#include "marginmine/search.hpp"
#include "marginmine/segment.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;
namespace mm = marginmine;

namespace {

using FloatArray =
    py::array_t<float, py::array::c_style | py::array::forcecast>;

mm::EmbeddingMatrix to_matrix(const FloatArray& array, bool normalize) {
    if (array.ndim() != 2) {
        throw std::invalid_argument("expected a 2-d array of embeddings");
    }
    const std::size_t count = static_cast<std::size_t>(array.shape(0));
    const std::uint32_t dim = static_cast<std::uint32_t>(array.shape(1));
    const float* data = array.data();
    std::vector<float> values(data, data + count * dim);
    mm::EmbeddingMatrix matrix =
        mm::make_matrix(dim, count, std::move(values));
    return normalize ? mm::normalize_l2(std::move(matrix))
                     : std::move(matrix);
}

FloatArray from_matrix(const mm::EmbeddingMatrix& matrix) {
    FloatArray array({static_cast<py::ssize_t>(matrix.count),
                      static_cast<py::ssize_t>(matrix.dim)});
    std::copy(matrix.values.begin(), matrix.values.end(),
              array.mutable_data());
    return array;
}

using PairList = std::vector<std::tuple<std::uint64_t, std::uint64_t, double>>;

PairList to_pair_list(const std::vector<mm::MinedPair>& pairs) {
    PairList out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.emplace_back(p.src_id, p.tgt_id, p.margin);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "margin-based parallel corpus mining over sentence embeddings";

    m.def(
        "normalize",
        [](const FloatArray& array) {
            return from_matrix(to_matrix(array, true));
        },
        py::arg("embeddings"),
        "Return a copy with every row scaled to unit Euclidean norm.");

    m.def(
        "margin_score",
        [](double cos_xy, const std::vector<double>& nn_x_sims,
           const std::vector<double>& nn_y_sims) {
            return mm::margin_score(cos_xy, nn_x_sims, nn_y_sims);
        },
        py::arg("cos_xy"), py::arg("nn_x_sims"), py::arg("nn_y_sims"),
        "Ratio-of-means margin; -inf flags an unusable denominator.");

    m.def(
        "search_exact",
        [](const FloatArray& data, const FloatArray& queries, std::uint32_t k,
           std::size_t threads) {
            const mm::NeighborTable table = mm::search_exact(
                to_matrix(data, true), to_matrix(queries, true), k, threads);
            std::vector<std::vector<std::pair<std::uint64_t, double>>> out;
            out.reserve(table.size());
            for (const auto& hits : table) {
                std::vector<std::pair<std::uint64_t, double>> row;
                row.reserve(hits.size());
                for (const auto& hit : hits) {
                    row.emplace_back(hit.id, hit.sim);
                }
                out.push_back(std::move(row));
            }
            return out;
        },
        py::arg("data"), py::arg("queries"), py::arg("k"),
        py::arg("threads") = 1,
        "Exact top-k cosine search; one (id, sim) list per query.");

    m.def(
        "mine",
        [](const FloatArray& src, const FloatArray& tgt, std::uint32_t k,
           double threshold, double retain_floor, std::size_t threads) {
            mm::MiningConfig config;
            config.k = k;
            config.threshold = threshold;
            config.retain_floor = retain_floor;
            config.threads = threads;
            const mm::MinedBitext bitext =
                mm::mine(to_matrix(src, true), to_matrix(tgt, true), config);
            return std::make_pair(to_pair_list(bitext.primary),
                                  to_pair_list(bitext.secondary));
        },
        py::arg("src"), py::arg("tgt"), py::arg("k") = 4,
        py::arg("threshold") = 1.04, py::arg("retain_floor") = 1.02,
        py::arg("threads") = 1,
        "Mine pairs with the exact backend. Returns (primary, secondary) "
        "lists of (src_id, tgt_id, margin) tuples.");

    m.def(
        "precision_recall",
        [](const std::vector<std::pair<std::uint64_t, std::uint64_t>>& mined,
           const std::vector<std::pair<std::uint64_t, std::uint64_t>>& gold) {
            std::vector<mm::MinedPair> mined_pairs;
            mined_pairs.reserve(mined.size());
            for (const auto& [src, tgt] : mined) {
                mm::MinedPair pair;
                pair.src_id = src;
                pair.tgt_id = tgt;
                mined_pairs.push_back(pair);
            }
            mm::GoldAlignment alignment;
            alignment.pairs = gold;
            const mm::PrfMetrics metrics =
                mm::precision_recall(mined_pairs, alignment);
            return std::make_tuple(metrics.precision, metrics.recall,
                                   metrics.f1);
        },
        py::arg("mined"), py::arg("gold"),
        "Set-overlap (precision, recall, f1) of mined id pairs against gold.");

    m.def(
        "segment",
        [](const std::string& text, const std::string& lang) {
            return mm::segment(text, mm::rules_for_language(lang));
        },
        py::arg("text"), py::arg("lang") = "en",
        "Split text into sentences with the rules for the given language.");

    m.def("dedup", &mm::dedup, py::arg("sentences"),
          "Order-preserving exact dedup on NFC-normalized, trimmed keys.");

    m.def(
        "classify",
        [](const std::string& sentence) {
            const mm::LidPrediction prediction =
                mm::classify(mm::builtin_lid_model(), sentence);
            return std::make_pair(prediction.lang, prediction.confidence);
        },
        py::arg("sentence"),
        "Predict (language, confidence) with the builtin n-gram model.");

    m.def(
        "read_embeddings",
        [](const std::string& path) {
            return from_matrix(mm::load_embeddings(path));
        },
        py::arg("path"), "Load a binary embedding matrix file.");

    m.def(
        "write_embeddings",
        [](const std::string& path, const FloatArray& array) {
            mm::write_embeddings(to_matrix(array, false), path);
        },
        py::arg("path"), py::arg("embeddings"),
        "Write a binary embedding matrix file.");
}
