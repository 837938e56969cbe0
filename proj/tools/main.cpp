#include "marginmine/corpus.hpp"
#include "marginmine/embeddings.hpp"
#include "marginmine/errors.hpp"
#include "marginmine/evaluation.hpp"
#include "marginmine/ivfpq.hpp"
#include "marginmine/lid.hpp"
#include "marginmine/manifest.hpp"
#include "marginmine/mining.hpp"
#include "marginmine/parallel.hpp"
#include "marginmine/segment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

namespace mm = marginmine;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

std::filesystem::path audit_path(std::filesystem::path out) {
    out.replace_extension();
    out += ".drop.tsv";
    return out;
}

// ---- prep ----------------------------------------------------------------

struct PrepOptions {
    std::string in;
    std::string out;
    std::string lang;
    std::string field = "text";
    std::string labels;
    bool no_lid = false;
    bool fail_fast = false;
    int threads = 0;
    std::uint64_t seed = 0;
};

void run_prep(const PrepOptions& opt) {
    Timer timer;
    const std::size_t threads = mm::resolve_threads(opt.threads);
    const mm::SegmenterRules rules = mm::rules_for_language(opt.lang);

    const mm::IngestResult ingested =
        mm::ingest_jsonl(opt.in, opt.field, opt.lang, opt.fail_fast);

    std::vector<std::string> sentences;
    for (const auto& doc : ingested.documents) {
        for (auto& sentence : mm::segment(doc.text, rules)) {
            sentences.push_back(mm::scrub_sentence(sentence));
        }
    }
    sentences = mm::dedup(sentences);

    mm::LidFilterResult filtered;
    if (opt.no_lid) {
        filtered.kept = sentences;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            filtered.kept_indices.push_back(i);
        }
    } else if (!opt.labels.empty()) {
        filtered = mm::lid_filter_with_labels(
            sentences, opt.lang, mm::load_labels(opt.labels));
    } else {
        filtered =
            mm::lid_filter(sentences, opt.lang, mm::builtin_lid_model(),
                           threads);
    }

    mm::SentenceTable table;
    table.texts = filtered.kept;
    mm::write_sentences(table, opt.out);

    const std::filesystem::path audit = audit_path(opt.out);
    {
        std::ofstream out(audit, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw mm::io_error("cannot open drop audit: " + audit.string());
        }
        char conf[32];
        for (const auto& d : filtered.dropped) {
            std::snprintf(conf, sizeof(conf), "%.4f", d.confidence);
            out << d.text << '\t' << d.predicted << '\t' << conf << '\n';
        }
    }

    mm::RunManifest manifest;
    manifest.command = "prep";
    manifest.seed = opt.seed;
    manifest.config = {{"lang", opt.lang},
                       {"field", opt.field},
                       {"lid", opt.no_lid ? "off"
                              : opt.labels.empty() ? "builtin"
                                                   : "labels"},
                       {"fail_fast", opt.fail_fast ? "true" : "false"},
                       {"threads", std::to_string(threads)}};
    manifest.input_digests[opt.in] = mm::file_digest(opt.in);
    if (!opt.labels.empty()) {
        manifest.input_digests[opt.labels] = mm::file_digest(opt.labels);
    }
    manifest.duration_seconds = timer.seconds();
    mm::write_manifest(manifest, opt.out);

    std::cout << "prep: " << ingested.documents.size() << " documents, "
              << sentences.size() << " unique sentences, "
              << filtered.kept.size() << " kept, " << filtered.dropped.size()
              << " dropped";
    if (ingested.bad_json != 0 || ingested.missing_field != 0) {
        std::cout << " (" << ingested.bad_json << " bad JSON lines, "
                  << ingested.missing_field << " lines without '" << opt.field
                  << "')";
    }
    std::cout << '\n';
}

// ---- index ---------------------------------------------------------------

struct IndexOptions {
    std::string emb;
    std::string out;
    std::uint32_t nlist = 0;
    std::uint32_t m = 0;
    int max_iters = 25;
    int threads = 0;
    std::uint64_t seed = 0;
};

void run_index(const IndexOptions& opt) {
    Timer timer;
    const std::size_t threads = mm::resolve_threads(opt.threads);

    mm::EmbeddingMatrix data =
        mm::normalize_l2(mm::load_embeddings(opt.emb));

    const std::uint32_t nlist =
        opt.nlist != 0 ? opt.nlist : mm::default_nlist(data.count);
    const std::uint32_t m = opt.m != 0 ? opt.m : mm::default_m(data.dim);

    mm::IndexBuildOptions build_opts;
    build_opts.max_iters = opt.max_iters;
    build_opts.threads = threads;
    const mm::IvfPqIndex index =
        mm::build_index(data, nlist, m, opt.seed, build_opts);
    mm::save_index(index, opt.out);

    const mm::IndexStats stats = mm::index_stats(index);

    mm::RunManifest manifest;
    manifest.command = "index";
    manifest.seed = opt.seed;
    manifest.config = {{"nlist", std::to_string(nlist)},
                       {"m", std::to_string(m)},
                       {"ksub", std::to_string(index.ksub)},
                       {"max_iters", std::to_string(opt.max_iters)},
                       {"threads", std::to_string(threads)}};
    manifest.input_digests[opt.emb] = mm::file_digest(opt.emb);
    manifest.duration_seconds = timer.seconds();
    mm::write_manifest(manifest, opt.out);

    std::cout << "index: " << index.count << " vectors, nlist=" << nlist
              << ", m=" << m << ", ksub=" << index.ksub << ", code payload "
              << stats.code_bytes << " bytes vs raw " << stats.raw_vector_bytes
              << " bytes\n";
}

// ---- mine ----------------------------------------------------------------

struct MineOptions {
    std::string src_prefix;
    std::string tgt_prefix;
    std::string src_emb;
    std::string src_texts;
    std::string tgt_emb;
    std::string tgt_texts;
    std::string out;
    std::string dump_candidates;
    std::string dump_pairs;
    std::string backend = "exact";
    std::uint32_t k = 4;
    double threshold = 1.04;
    double retain_floor = 1.02;
    std::uint32_t nlist = 0;
    std::uint32_t m = 0;
    std::uint32_t nprobe = 0;
    int max_iters = 25;
    int threads = 0;
    std::uint64_t seed = 0;
};

void resolve_side(const std::string& prefix, std::string& emb,
                  std::string& texts, const char* side) {
    if (emb.empty() && !prefix.empty()) {
        emb = prefix + ".emb";
    }
    if (texts.empty() && !prefix.empty()) {
        texts = prefix + ".txt";
    }
    if (emb.empty() || texts.empty()) {
        throw mm::parameter_error(
            std::string("missing ") + side +
            " inputs: pass --" + side + " PREFIX or --" + side +
            "-emb and --" + side + "-texts");
    }
}

void run_mine(MineOptions opt) {
    Timer timer;
    resolve_side(opt.src_prefix, opt.src_emb, opt.src_texts, "src");
    resolve_side(opt.tgt_prefix, opt.tgt_emb, opt.tgt_texts, "tgt");

    mm::MiningConfig config;
    config.k = opt.k;
    config.threshold = opt.threshold;
    config.retain_floor = opt.retain_floor;
    if (opt.backend == "exact") {
        config.backend = mm::Backend::exact;
    } else if (opt.backend == "ivfpq") {
        config.backend = mm::Backend::ivfpq;
    } else {
        throw mm::parameter_error("unknown backend '" + opt.backend +
                                  "' (expected exact or ivfpq)");
    }
    config.nlist = opt.nlist;
    config.m = opt.m;
    config.nprobe = opt.nprobe;
    config.max_iters = opt.max_iters;
    config.seed = opt.seed;
    config.threads = mm::resolve_threads(opt.threads);

    mm::EmbeddingMatrix src = mm::load_embeddings(opt.src_emb);
    mm::EmbeddingMatrix tgt = mm::load_embeddings(opt.tgt_emb);
    const mm::SentenceTable src_texts = mm::load_sentences(opt.src_texts);
    const mm::SentenceTable tgt_texts = mm::load_sentences(opt.tgt_texts);
    if (src_texts.texts.size() != src.count) {
        throw mm::consistency_error(
            "src sentence file has " + std::to_string(src_texts.texts.size()) +
            " lines for " + std::to_string(src.count) + " embeddings");
    }
    if (tgt_texts.texts.size() != tgt.count) {
        throw mm::consistency_error(
            "tgt sentence file has " + std::to_string(tgt_texts.texts.size()) +
            " lines for " + std::to_string(tgt.count) + " embeddings");
    }
    src = mm::normalize_l2(std::move(src));
    tgt = mm::normalize_l2(std::move(tgt));

    const std::vector<mm::CandidatePair> candidates =
        mm::score_candidates(src, tgt, config);
    const mm::MinedBitext bitext =
        mm::select_pairs(candidates, config.threshold, config.retain_floor);

    mm::write_bitext(bitext, src_texts, tgt_texts, opt.out);
    if (!opt.dump_candidates.empty()) {
        mm::write_candidates(candidates, opt.dump_candidates);
    }
    if (!opt.dump_pairs.empty()) {
        std::ofstream out(opt.dump_pairs, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw mm::io_error("cannot open pair dump: " + opt.dump_pairs);
        }
        char margin[32];
        for (const auto& p : bitext.primary) {
            std::snprintf(margin, sizeof(margin), "%.6f", p.margin);
            out << p.src_id << '\t' << p.tgt_id << '\t' << margin << '\n';
        }
    }

    mm::RunManifest manifest;
    manifest.command = "mine";
    manifest.seed = opt.seed;
    manifest.config = {{"k", std::to_string(config.k)},
                       {"threshold", std::to_string(config.threshold)},
                       {"retain_floor", std::to_string(config.retain_floor)},
                       {"backend", opt.backend},
                       {"nlist", std::to_string(config.nlist)},
                       {"m", std::to_string(config.m)},
                       {"nprobe", std::to_string(config.nprobe)},
                       {"max_iters", std::to_string(config.max_iters)},
                       {"threads", std::to_string(config.threads)}};
    for (const auto& path :
         {opt.src_emb, opt.tgt_emb, opt.src_texts, opt.tgt_texts}) {
        manifest.input_digests[path] = mm::file_digest(path);
    }
    manifest.duration_seconds = timer.seconds();
    mm::write_manifest(manifest, opt.out);

    std::cout << "mine: " << candidates.size() << " candidates, "
              << bitext.primary.size() << " pairs at threshold "
              << opt.threshold << ", " << bitext.secondary.size()
              << " in the retain band\n";
}

// ---- eval ----------------------------------------------------------------

struct EvalOptions {
    std::string pairs;
    std::string mined;
    std::string src_texts;
    std::string tgt_texts;
    std::string gold;
    std::string out;
    std::uint64_t seed = 0;
};

std::vector<mm::MinedPair> load_pairs_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw mm::io_error("cannot open pair file: " + path.string());
    }
    std::vector<mm::MinedPair> pairs;
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
        const std::size_t tab1 = line.find('\t');
        const std::size_t tab2 =
            tab1 == std::string::npos ? std::string::npos
                                      : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
            throw mm::format_error("pair file " + path.string() + " line " +
                                   std::to_string(line_no) +
                                   ": expected src<TAB>tgt<TAB>margin");
        }
        mm::MinedPair pair;
        try {
            pair.src_id = std::stoull(line.substr(0, tab1));
            pair.tgt_id = std::stoull(line.substr(tab1 + 1, tab2 - tab1 - 1));
            pair.margin = std::stod(line.substr(tab2 + 1));
        } catch (const std::exception&) {
            throw mm::format_error("pair file " + path.string() + " line " +
                                   std::to_string(line_no) +
                                   ": unparsable field");
        }
        pairs.push_back(pair);
    }
    return pairs;
}

std::vector<mm::MinedPair> load_mined_tsv(
    const std::filesystem::path& path, const mm::SentenceTable& src_texts,
    const mm::SentenceTable& tgt_texts) {
    const auto build_lookup = [](const mm::SentenceTable& table) {
        std::unordered_map<std::string, std::uint64_t> lookup;
        for (std::size_t i = 0; i < table.texts.size(); ++i) {
            lookup.emplace(table.texts[i], static_cast<std::uint64_t>(i));
        }
        return lookup;
    };
    const auto src_lookup = build_lookup(src_texts);
    const auto tgt_lookup = build_lookup(tgt_texts);

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw mm::io_error("cannot open mined file: " + path.string());
    }
    std::vector<mm::MinedPair> pairs;
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
        const std::size_t tab1 = line.find('\t');
        const std::size_t tab2 =
            tab1 == std::string::npos ? std::string::npos
                                      : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
            throw mm::format_error("mined file " + path.string() + " line " +
                                   std::to_string(line_no) +
                                   ": expected margin<TAB>src<TAB>tgt");
        }
        mm::MinedPair pair;
        try {
            pair.margin = std::stod(line.substr(0, tab1));
        } catch (const std::exception&) {
            throw mm::format_error("mined file " + path.string() + " line " +
                                   std::to_string(line_no) +
                                   ": unparsable margin");
        }
        const std::string src_text = line.substr(tab1 + 1, tab2 - tab1 - 1);
        const std::string tgt_text = line.substr(tab2 + 1);
        const auto src_it = src_lookup.find(src_text);
        const auto tgt_it = tgt_lookup.find(tgt_text);
        if (src_it == src_lookup.end() || tgt_it == tgt_lookup.end()) {
            throw mm::consistency_error(
                "mined file " + path.string() + " line " +
                std::to_string(line_no) +
                ": sentence not found in the given tables");
        }
        pair.src_id = src_it->second;
        pair.tgt_id = tgt_it->second;
        pairs.push_back(pair);
    }
    return pairs;
}

void run_eval(const EvalOptions& opt) {
    Timer timer;
    if (opt.pairs.empty() == opt.mined.empty()) {
        throw mm::parameter_error(
            "pass exactly one of --pairs or --mined");
    }

    std::vector<mm::MinedPair> mined;
    mm::RunManifest manifest;
    manifest.command = "eval";
    manifest.seed = opt.seed;
    if (!opt.pairs.empty()) {
        mined = load_pairs_tsv(opt.pairs);
        manifest.input_digests[opt.pairs] = mm::file_digest(opt.pairs);
        manifest.config["source"] = "pairs";
    } else {
        if (opt.src_texts.empty() || opt.tgt_texts.empty()) {
            throw mm::parameter_error(
                "--mined needs --src-texts and --tgt-texts to map sentences "
                "back to ids");
        }
        const mm::SentenceTable src = mm::load_sentences(opt.src_texts);
        const mm::SentenceTable tgt = mm::load_sentences(opt.tgt_texts);
        mined = load_mined_tsv(opt.mined, src, tgt);
        manifest.input_digests[opt.mined] = mm::file_digest(opt.mined);
        manifest.input_digests[opt.src_texts] =
            mm::file_digest(opt.src_texts);
        manifest.input_digests[opt.tgt_texts] =
            mm::file_digest(opt.tgt_texts);
        manifest.config["source"] = "mined";
    }

    const mm::GoldAlignment gold = mm::load_gold(opt.gold);
    manifest.input_digests[opt.gold] = mm::file_digest(opt.gold);

    const mm::PrfMetrics metrics = mm::precision_recall(mined, gold);

    char line[96];
    std::snprintf(line, sizeof(line), "%.4f\t%.4f\t%.4f\n", metrics.precision,
                  metrics.recall, metrics.f1);
    {
        std::ofstream out(opt.out, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw mm::io_error("cannot open eval report: " + opt.out);
        }
        out << "precision\trecall\tf1\n" << line;
    }
    std::cout << "precision\trecall\tf1\n" << line;

    manifest.duration_seconds = timer.seconds();
    mm::write_manifest(manifest, opt.out);
}

// ---- sweep ---------------------------------------------------------------

struct SweepOptions {
    std::string candidates;
    std::string gold;
    std::string thresholds;
    std::string out;
    std::uint64_t seed = 0;
};

std::vector<double> parse_thresholds(const std::string& text) {
    std::vector<double> values;
    const auto parse_double = [&](const std::string& field) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(field, &pos);
            if (pos != field.size()) {
                throw std::invalid_argument(field);
            }
            return v;
        } catch (const std::exception&) {
            throw mm::parameter_error("unparsable threshold '" + field +
                                      "' in '" + text + "'");
        }
    };
    if (text.find(':') != std::string::npos) {
        const std::size_t c1 = text.find(':');
        const std::size_t c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos ||
            text.find(':', c2 + 1) != std::string::npos) {
            throw mm::parameter_error(
                "threshold range must be start:end:step, got '" + text + "'");
        }
        const double start = parse_double(text.substr(0, c1));
        const double end = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
        const double step = parse_double(text.substr(c2 + 1));
        if (step <= 0.0) {
            throw mm::parameter_error("threshold step must be positive");
        }
        if (end < start - 1e-12) {
            throw mm::parameter_error("threshold range end is below start");
        }
        for (std::size_t i = 0;; ++i) {
            const double v = start + static_cast<double>(i) * step;
            if (v > end + 1e-12) {
                break;
            }
            values.push_back(v);
        }
    } else {
        std::size_t begin = 0;
        while (begin <= text.size()) {
            const std::size_t comma = text.find(',', begin);
            const std::string field =
                comma == std::string::npos ? text.substr(begin)
                                           : text.substr(begin, comma - begin);
            values.push_back(parse_double(field));
            if (comma == std::string::npos) {
                break;
            }
            begin = comma + 1;
        }
    }
    return values;
}

void run_sweep(const SweepOptions& opt) {
    Timer timer;
    const std::vector<double> thresholds = parse_thresholds(opt.thresholds);
    const std::vector<mm::CandidatePair> candidates =
        mm::load_candidates(opt.candidates);

    std::optional<mm::GoldAlignment> gold;
    if (!opt.gold.empty()) {
        gold = mm::load_gold(opt.gold);
    }
    const std::vector<mm::SweepRow> rows = mm::threshold_sweep(
        candidates, gold ? &*gold : nullptr, thresholds);
    mm::write_sweep_report(rows, opt.out);

    mm::RunManifest manifest;
    manifest.command = "sweep";
    manifest.seed = opt.seed;
    manifest.config = {{"thresholds", opt.thresholds},
                       {"gold", opt.gold.empty() ? "none" : "given"}};
    manifest.input_digests[opt.candidates] = mm::file_digest(opt.candidates);
    if (!opt.gold.empty()) {
        manifest.input_digests[opt.gold] = mm::file_digest(opt.gold);
    }
    manifest.duration_seconds = timer.seconds();
    mm::write_manifest(manifest, opt.out);

    std::cout << "sweep: " << rows.size() << " thresholds over "
              << candidates.size() << " candidates\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"margin-based parallel corpus miner"};
    app.set_version_flag("--version", mm::kToolVersion);
    app.require_subcommand(1);

    PrepOptions prep;
    CLI::App* prep_cmd = app.add_subcommand(
        "prep", "segment, dedup, and language-filter a JSONL dump");
    prep_cmd->add_option("--in", prep.in, "input JSONL file")->required();
    prep_cmd->add_option("--out", prep.out, "output sentence file")
        ->required();
    prep_cmd->add_option("--lang", prep.lang, "expected language code")
        ->required();
    prep_cmd->add_option("--field", prep.field,
                         "JSON member holding the text (default: text)");
    prep_cmd->add_option("--lid-labels", prep.labels,
                         "external per-sentence language label file");
    prep_cmd->add_flag("--no-lid", prep.no_lid,
                       "skip language-identification filtering");
    prep_cmd->add_flag("--fail-fast", prep.fail_fast,
                       "error out on the first malformed JSON line");
    prep_cmd->add_option("--threads", prep.threads,
                         "worker threads (default: MARGIN_MINER_THREADS or "
                         "hardware)");
    prep_cmd->add_option("--seed", prep.seed, "run seed (recorded)");
    prep_cmd->callback([&] { run_prep(prep); });

    IndexOptions index;
    CLI::App* index_cmd =
        app.add_subcommand("index", "build and serialize an IVF-PQ index");
    index_cmd->add_option("--emb", index.emb, "embedding matrix file")
        ->required();
    index_cmd->add_option("--out", index.out, "output index file")
        ->required();
    index_cmd->add_option("--nlist", index.nlist,
                          "coarse cells (default: min(ceil(4*sqrt(n)), n))");
    index_cmd->add_option("--m", index.m,
                          "subquantizers (default: largest m with dim/m >= "
                          "4)");
    index_cmd->add_option("--max-iters", index.max_iters,
                          "k-means iteration cap (default: 25)");
    index_cmd->add_option("--threads", index.threads, "worker threads");
    index_cmd->add_option("--seed", index.seed, "training seed");
    index_cmd->callback([&] { run_index(index); });

    MineOptions mine;
    CLI::App* mine_cmd = app.add_subcommand(
        "mine", "mine translation pairs from two embedded corpora");
    mine_cmd->add_option("--src", mine.src_prefix,
                         "source prefix, expands to PREFIX.emb/PREFIX.txt");
    mine_cmd->add_option("--tgt", mine.tgt_prefix,
                         "target prefix, expands to PREFIX.emb/PREFIX.txt");
    mine_cmd->add_option("--src-emb", mine.src_emb, "source embedding file");
    mine_cmd->add_option("--src-texts", mine.src_texts,
                         "source sentence file");
    mine_cmd->add_option("--tgt-emb", mine.tgt_emb, "target embedding file");
    mine_cmd->add_option("--tgt-texts", mine.tgt_texts,
                         "target sentence file");
    mine_cmd->add_option("--out", mine.out, "output bitext TSV")->required();
    mine_cmd->add_option("--k", mine.k, "neighborhood size (default: 4)");
    mine_cmd->add_option("--threshold", mine.threshold,
                         "margin threshold (default: 1.04)");
    mine_cmd->add_option("--retain-floor", mine.retain_floor,
                         "lower margin bound for the .low stream (default: "
                         "1.02)");
    mine_cmd->add_option("--backend", mine.backend, "exact or ivfpq");
    mine_cmd->add_option("--nlist", mine.nlist, "ivfpq coarse cells");
    mine_cmd->add_option("--m", mine.m, "ivfpq subquantizers");
    mine_cmd->add_option("--nprobe", mine.nprobe,
                         "ivfpq cells scanned per query (default: nlist/4)");
    mine_cmd->add_option("--max-iters", mine.max_iters,
                         "ivfpq k-means iteration cap");
    mine_cmd->add_option("--dump-candidates", mine.dump_candidates,
                         "write the pre-threshold candidate union here");
    mine_cmd->add_option("--dump-pairs", mine.dump_pairs,
                         "write primary pairs as src<TAB>tgt<TAB>margin");
    mine_cmd->add_option("--threads", mine.threads, "worker threads");
    mine_cmd->add_option("--seed", mine.seed, "index training seed");
    mine_cmd->callback([&] { run_mine(mine); });

    EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "score mined pairs against a gold alignment");
    eval_cmd->add_option("--pairs", eval.pairs,
                         "mined id pairs (src<TAB>tgt<TAB>margin)");
    eval_cmd->add_option("--mined", eval.mined,
                         "mined bitext TSV (needs the sentence tables)");
    eval_cmd->add_option("--src-texts", eval.src_texts,
                         "source sentence file for --mined");
    eval_cmd->add_option("--tgt-texts", eval.tgt_texts,
                         "target sentence file for --mined");
    eval_cmd->add_option("--gold", eval.gold, "gold alignment TSV")
        ->required();
    eval_cmd->add_option("--out", eval.out, "report file")->required();
    eval_cmd->add_option("--seed", eval.seed, "run seed (recorded)");
    eval_cmd->callback([&] { run_eval(eval); });

    SweepOptions sweep;
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "replay the threshold filter over a candidate dump");
    sweep_cmd->add_option("--candidates", sweep.candidates,
                          "candidate dump from mine --dump-candidates")
        ->required();
    sweep_cmd->add_option("--gold", sweep.gold, "gold alignment TSV");
    sweep_cmd
        ->add_option("--thresholds", sweep.thresholds,
                     "start:end:step range or comma-separated list")
        ->required();
    sweep_cmd->add_option("--out", sweep.out, "report TSV")->required();
    sweep_cmd->add_option("--seed", sweep.seed, "run seed (recorded)");
    sweep_cmd->callback([&] { run_sweep(sweep); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const mm::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
