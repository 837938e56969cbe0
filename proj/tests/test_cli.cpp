#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "testutil.hpp"

#include "marginmine/embeddings.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace mm = marginmine;

namespace {

// Path of the command-line binary under test, supplied by the harness as
// the last process argument.
std::string g_cli;

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout and stderr merged
};

RunResult run_command(const std::string& cmd) {
    RunResult result;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
        result.output.append(buf, n);
    }
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

RunResult run_cli(const std::string& args) {
    return run_command("\"" + g_cli + "\" " + args + " 2>&1");
}

// Same as run_cli but with an environment assignment ahead of the command.
RunResult run_cli_env(const std::string& env, const std::string& args) {
    return run_command(env + " \"" + g_cli + "\" " + args + " 2>&1");
}

std::string q(const std::filesystem::path& p) {
    return "\"" + p.string() + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(bool(out));
    out << text;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t begin = 0;
    while (begin < text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string::npos) {
            end = text.size();
        }
        lines.push_back(text.substr(begin, end - begin));
        begin = end + 1;
    }
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
        const std::size_t tab = line.find('\t', begin);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(begin));
            break;
        }
        fields.push_back(line.substr(begin, tab - begin));
        begin = tab + 1;
    }
    return fields;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

// Ten planted pairs: target row i is a lightly perturbed copy of source
// row i, so the expected alignment is the identity and every planted
// margin sits far above the default threshold.
struct MineFixture {
    testutil::TempDir dir;

    MineFixture() {
        const std::uint32_t dim = 8;
        const std::size_t count = 10;
        const mm::EmbeddingMatrix src =
            testutil::random_unit_matrix(dim, count, 401);
        const std::vector<float> noise =
            testutil::gaussian_values(dim, count, 402);
        std::vector<float> shifted(src.values.size());
        for (std::size_t i = 0; i < shifted.size(); ++i) {
            shifted[i] = src.values[i] + 0.05f * noise[i];
        }
        const mm::EmbeddingMatrix tgt = mm::normalize_l2(
            mm::make_matrix(dim, count, std::move(shifted)));
        mm::write_embeddings(src, dir.file("src.emb"));
        mm::write_embeddings(tgt, dir.file("tgt.emb"));

        mm::SentenceTable src_table;
        mm::SentenceTable tgt_table;
        std::string gold;
        for (std::size_t i = 0; i < count; ++i) {
            src_table.texts.push_back("src sentence " + std::to_string(i));
            tgt_table.texts.push_back("tgt sentence " + std::to_string(i));
            gold += std::to_string(i) + "\t" + std::to_string(i) + "\n";
        }
        mm::write_sentences(src_table, dir.file("src.txt"));
        mm::write_sentences(tgt_table, dir.file("tgt.txt"));
        write_text(dir.file("gold.tsv"), gold);
    }

    std::string mine_args(const std::string& out_name,
                          const std::string& extra) const {
        return "mine --src " + q(dir.file("src")) + " --tgt " +
               q(dir.file("tgt")) + " --out " + q(dir.file(out_name)) +
               " --seed 11 " + extra;
    }
};

} // namespace

TEST_CASE("version flag and usage errors") {
    SUBCASE("--version reports the tool version") {
        const RunResult r = run_cli("--version");
        CHECK(r.exit_code == 0);
        CHECK(contains(r.output, "0.1.0"));
    }
    SUBCASE("a missing subcommand is a usage error") {
        const RunResult r = run_cli("");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("an unknown flag is a usage error") {
        const RunResult r = run_cli("mine --bogus 1");
        CHECK(r.exit_code == 2);
    }
    SUBCASE("a missing required option is a usage error") {
        const RunResult r = run_cli("prep --in x.jsonl --out y.txt");
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("prep pipeline end to end") {
    testutil::TempDir dir;

    SUBCASE("segments, dedups, filters, and audits drops") {
        // Both held-out sentences are classified correctly by the builtin
        // model (covered in the language-id tests); the junk line counts
        // as bad JSON under the default lenient ingestion.
        write_text(dir.file("dump.jsonl"),
                   "{\"id\":\"d1\",\"text\":\"Die Stadt eröffnet nächsten "
                   "Monat ein neues Museum. Die Stadt eröffnet nächsten "
                   "Monat ein neues Museum.\"}\n"
                   "this line is not JSON\n"
                   "{\"id\":\"d2\",\"text\":\"La ville ouvre un nouveau "
                   "musée le mois prochain.\"}\n");
        const RunResult r = run_cli(
            "prep --in " + q(dir.file("dump.jsonl")) + " --out " +
            q(dir.file("sents.txt")) + " --lang de --seed 7");
        CHECK(r.exit_code == 0);
        CHECK(contains(r.output, "prep:"));
        CHECK(contains(r.output, "1 bad JSON lines"));

        CHECK(slurp(dir.file("sents.txt")) ==
              "Die Stadt eröffnet nächsten Monat ein neues Museum.\n");

        const auto audit = slurp(dir.file("sents.drop.tsv"));
        const auto lines = split_lines(audit);
        REQUIRE(lines.size() == 1);
        const auto fields = split_tabs(lines[0]);
        REQUIRE(fields.size() == 3);
        CHECK(fields[0] == "La ville ouvre un nouveau musée le mois prochain.");
        CHECK(fields[1] == "fr");

        const auto manifest = nlohmann::json::parse(
            slurp(dir.file("sents.txt.manifest.json")));
        CHECK(manifest["command"] == "prep");
        CHECK(manifest["seed"] == 7);
        CHECK(manifest["config"]["lang"] == "de");
    }

    SUBCASE("--no-lid keeps foreign sentences") {
        write_text(dir.file("dump.jsonl"),
                   "{\"text\":\"Ein kurzer Satz.\"}\n"
                   "{\"text\":\"A completely English sentence.\"}\n");
        const RunResult r = run_cli(
            "prep --in " + q(dir.file("dump.jsonl")) + " --out " +
            q(dir.file("sents.txt")) + " --lang de --no-lid");
        CHECK(r.exit_code == 0);
        CHECK(slurp(dir.file("sents.txt")) ==
              "Ein kurzer Satz.\nA completely English sentence.\n");
        CHECK(std::filesystem::file_size(dir.file("sents.drop.tsv")) == 0);
    }

    SUBCASE("--lid-labels overrides the builtin classifier") {
        write_text(dir.file("dump.jsonl"),
                   "{\"text\":\"Aaa bbb.\"}\n"
                   "{\"text\":\"Ccc ddd.\"}\n");
        write_text(dir.file("labels.txt"), "de\nfr\n");
        const RunResult r = run_cli(
            "prep --in " + q(dir.file("dump.jsonl")) + " --out " +
            q(dir.file("sents.txt")) + " --lang de --lid-labels " +
            q(dir.file("labels.txt")));
        CHECK(r.exit_code == 0);
        CHECK(slurp(dir.file("sents.txt")) == "Aaa bbb.\n");
        CHECK(slurp(dir.file("sents.drop.tsv")) == "Ccc ddd.\tfr\t1.0000\n");
    }

    SUBCASE("--fail-fast reports the offending line") {
        write_text(dir.file("dump.jsonl"),
                   "{\"text\":\"Ein Satz.\"}\n"
                   "broken\n");
        const RunResult r = run_cli(
            "prep --in " + q(dir.file("dump.jsonl")) + " --out " +
            q(dir.file("sents.txt")) + " --lang de --fail-fast");
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "line 2"));
    }

    SUBCASE("an unsupported segmentation language is rejected") {
        write_text(dir.file("dump.jsonl"), "{\"text\":\"x.\"}\n");
        const RunResult r = run_cli(
            "prep --in " + q(dir.file("dump.jsonl")) + " --out " +
            q(dir.file("sents.txt")) + " --lang th");
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "error:"));
    }

    SUBCASE("a missing input file is reported cleanly") {
        const RunResult r = run_cli(
            "prep --in " + q(dir.file("absent.jsonl")) + " --out " +
            q(dir.file("sents.txt")) + " --lang de");
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "error:"));
    }
}

TEST_CASE("index subcommand") {
    testutil::TempDir dir;
    mm::write_embeddings(testutil::random_unit_matrix(16, 128, 5),
                         dir.file("e.emb"));

    SUBCASE("builds the same file regardless of thread count") {
        const RunResult a = run_cli(
            "index --emb " + q(dir.file("e.emb")) + " --out " +
            q(dir.file("a.idx")) + " --nlist 8 --m 4 --seed 9 --threads 3");
        CHECK(a.exit_code == 0);
        CHECK(contains(a.output, "index:"));
        CHECK(contains(a.output, "code payload"));

        const RunResult b = run_cli(
            "index --emb " + q(dir.file("e.emb")) + " --out " +
            q(dir.file("b.idx")) + " --nlist 8 --m 4 --seed 9 --threads 1");
        CHECK(b.exit_code == 0);
        CHECK(slurp(dir.file("a.idx")) == slurp(dir.file("b.idx")));

        const auto manifest = nlohmann::json::parse(
            slurp(dir.file("a.idx.manifest.json")));
        CHECK(manifest["command"] == "index");
        CHECK(manifest["config"]["nlist"] == "8");
        CHECK(manifest["config"]["m"] == "4");
    }

    SUBCASE("the thread environment variable is honoured") {
        const RunResult a = run_cli_env(
            "MARGIN_MINER_THREADS=4",
            "index --emb " + q(dir.file("e.emb")) + " --out " +
                q(dir.file("env.idx")) + " --nlist 8 --m 4 --seed 9");
        CHECK(a.exit_code == 0);
        const RunResult b = run_cli(
            "index --emb " + q(dir.file("e.emb")) + " --out " +
            q(dir.file("one.idx")) + " --nlist 8 --m 4 --seed 9 --threads 1");
        CHECK(b.exit_code == 0);
        CHECK(slurp(dir.file("env.idx")) == slurp(dir.file("one.idx")));
    }

    SUBCASE("a subquantizer count that does not divide the dimension fails") {
        const RunResult r = run_cli(
            "index --emb " + q(dir.file("e.emb")) + " --out " +
            q(dir.file("bad.idx")) + " --m 7");
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "error:"));
    }
}

TEST_CASE("mine recovers the planted alignment") {
    MineFixture f;

    SUBCASE("prefix convention, dumps, and thread determinism") {
        const RunResult a = run_cli(f.mine_args(
            "mined.tsv",
            "--dump-candidates " + q(f.dir.file("cands.bin")) +
                " --dump-pairs " + q(f.dir.file("pairs.tsv")) +
                " --threads 2"));
        CHECK(a.exit_code == 0);
        CHECK(contains(a.output, "mine:"));
        CHECK(contains(a.output, "pairs at threshold"));

        const auto mined = split_lines(slurp(f.dir.file("mined.tsv")));
        REQUIRE(mined.size() == 10);
        for (const auto& line : mined) {
            const auto fields = split_tabs(line);
            REQUIRE(fields.size() == 3);
            CHECK(std::stod(fields[0]) >= 1.0399995);
            CHECK(contains(fields[1], "src sentence "));
            CHECK(contains(fields[2], "tgt sentence "));
        }
        CHECK(std::filesystem::exists(f.dir.file("mined.tsv.low")));

        // The planted construction aligns row i with row i.
        const auto pairs = split_lines(slurp(f.dir.file("pairs.tsv")));
        REQUIRE(pairs.size() == 10);
        std::vector<bool> seen(10, false);
        for (const auto& line : pairs) {
            const auto fields = split_tabs(line);
            REQUIRE(fields.size() == 3);
            CHECK(fields[0] == fields[1]);
            seen[std::stoul(fields[0])] = true;
        }
        for (bool s : seen) {
            CHECK(s);
        }

        const auto cands = slurp(f.dir.file("cands.bin"));
        REQUIRE(cands.size() >= 8);
        CHECK(cands.substr(0, 8) == "CANDS001");

        const RunResult b = run_cli(f.mine_args(
            "mined_b.tsv",
            "--dump-candidates " + q(f.dir.file("cands_b.bin")) +
                " --dump-pairs " + q(f.dir.file("pairs_b.tsv")) +
                " --threads 1"));
        CHECK(b.exit_code == 0);
        CHECK(slurp(f.dir.file("mined.tsv")) ==
              slurp(f.dir.file("mined_b.tsv")));
        CHECK(slurp(f.dir.file("mined.tsv.low")) ==
              slurp(f.dir.file("mined_b.tsv.low")));
        CHECK(slurp(f.dir.file("pairs.tsv")) ==
              slurp(f.dir.file("pairs_b.tsv")));
        CHECK(slurp(f.dir.file("cands.bin")) ==
              slurp(f.dir.file("cands_b.bin")));
    }

    SUBCASE("explicit file flags with the ivfpq backend agree") {
        const RunResult exact = run_cli(f.mine_args(
            "exact.tsv", "--dump-pairs " + q(f.dir.file("exact_pairs.tsv"))));
        CHECK(exact.exit_code == 0);

        const RunResult approx = run_cli(
            "mine --src-emb " + q(f.dir.file("src.emb")) + " --src-texts " +
            q(f.dir.file("src.txt")) + " --tgt-emb " +
            q(f.dir.file("tgt.emb")) + " --tgt-texts " +
            q(f.dir.file("tgt.txt")) + " --out " + q(f.dir.file("ivf.tsv")) +
            " --backend ivfpq --nlist 2 --nprobe 2 --m 4 --seed 11 "
            "--dump-pairs " + q(f.dir.file("ivf_pairs.tsv")));
        CHECK(approx.exit_code == 0);

        // Full probing with one codeword per point is lossless here, so
        // the selected ids match the exact backend.
        const auto read_ids = [](const std::string& text) {
            std::vector<std::pair<std::string, std::string>> ids;
            for (const auto& line : split_lines(text)) {
                const auto fields = split_tabs(line);
                REQUIRE(fields.size() == 3);
                ids.emplace_back(fields[0], fields[1]);
            }
            return ids;
        };
        CHECK(read_ids(slurp(f.dir.file("exact_pairs.tsv"))) ==
              read_ids(slurp(f.dir.file("ivf_pairs.tsv"))));
    }

    SUBCASE("an unknown backend is rejected") {
        const RunResult r = run_cli(f.mine_args("x.tsv", "--backend fancy"));
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "unknown backend"));
    }

    SUBCASE("a missing side is reported with the expected flags") {
        const RunResult r = run_cli("mine --src " + q(f.dir.file("src")) +
                                    " --out " + q(f.dir.file("x.tsv")));
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "missing tgt inputs"));
    }

    SUBCASE("mismatched sentence and embedding counts fail") {
        mm::SentenceTable nine;
        for (int i = 0; i < 9; ++i) {
            nine.texts.push_back("s" + std::to_string(i));
        }
        mm::write_sentences(nine, f.dir.file("short.txt"));
        const RunResult r = run_cli(
            "mine --src-emb " + q(f.dir.file("src.emb")) + " --src-texts " +
            q(f.dir.file("short.txt")) + " --tgt " + q(f.dir.file("tgt")) +
            " --out " + q(f.dir.file("x.tsv")));
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "sentence file"));
    }
}

TEST_CASE("eval scores mined output against gold") {
    MineFixture f;
    const RunResult mined = run_cli(f.mine_args(
        "mined.tsv", "--dump-pairs " + q(f.dir.file("pairs.tsv"))));
    REQUIRE(mined.exit_code == 0);

    SUBCASE("perfect recovery scores 1.0 across the board") {
        const RunResult r = run_cli(
            "eval --pairs " + q(f.dir.file("pairs.tsv")) + " --gold " +
            q(f.dir.file("gold.tsv")) + " --out " +
            q(f.dir.file("report.tsv")));
        CHECK(r.exit_code == 0);
        CHECK(contains(r.output, "precision\trecall\tf1"));
        CHECK(slurp(f.dir.file("report.tsv")) ==
              "precision\trecall\tf1\n1.0000\t1.0000\t1.0000\n");

        const auto manifest = nlohmann::json::parse(
            slurp(f.dir.file("report.tsv.manifest.json")));
        CHECK(manifest["command"] == "eval");
        CHECK(manifest["config"]["source"] == "pairs");
    }

    SUBCASE("partial gold yields the hand-computed numbers") {
        // 5 of the 10 mined pairs are in this gold set of 7.
        write_text(f.dir.file("gold7.tsv"),
                   "0\t0\n1\t1\n2\t2\n3\t3\n4\t4\n5\t6\n6\t5\n");
        const RunResult r = run_cli(
            "eval --pairs " + q(f.dir.file("pairs.tsv")) + " --gold " +
            q(f.dir.file("gold7.tsv")) + " --out " +
            q(f.dir.file("report.tsv")));
        CHECK(r.exit_code == 0);
        CHECK(slurp(f.dir.file("report.tsv")) ==
              "precision\trecall\tf1\n0.5000\t0.7143\t0.5882\n");
    }

    SUBCASE("--mined maps sentences back through the tables") {
        const RunResult r = run_cli(
            "eval --mined " + q(f.dir.file("mined.tsv")) + " --src-texts " +
            q(f.dir.file("src.txt")) + " --tgt-texts " +
            q(f.dir.file("tgt.txt")) + " --gold " + q(f.dir.file("gold.tsv")) +
            " --out " + q(f.dir.file("report.tsv")));
        CHECK(r.exit_code == 0);
        CHECK(slurp(f.dir.file("report.tsv")) ==
              "precision\trecall\tf1\n1.0000\t1.0000\t1.0000\n");
    }

    SUBCASE("--mined without the sentence tables is an error") {
        const RunResult r = run_cli(
            "eval --mined " + q(f.dir.file("mined.tsv")) + " --gold " +
            q(f.dir.file("gold.tsv")) + " --out " +
            q(f.dir.file("report.tsv")));
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "--src-texts"));
    }

    SUBCASE("passing both or neither pair source is an error") {
        const RunResult both = run_cli(
            "eval --pairs " + q(f.dir.file("pairs.tsv")) + " --mined " +
            q(f.dir.file("mined.tsv")) + " --gold " +
            q(f.dir.file("gold.tsv")) + " --out " +
            q(f.dir.file("report.tsv")));
        CHECK(both.exit_code == 2);
        CHECK(contains(both.output, "exactly one"));

        const RunResult neither = run_cli(
            "eval --gold " + q(f.dir.file("gold.tsv")) + " --out " +
            q(f.dir.file("report.tsv")));
        CHECK(neither.exit_code == 2);
    }

    SUBCASE("a malformed gold line is flagged with its line number") {
        write_text(f.dir.file("bad_gold.tsv"), "0\t0\nnot a pair\n");
        const RunResult r = run_cli(
            "eval --pairs " + q(f.dir.file("pairs.tsv")) + " --gold " +
            q(f.dir.file("bad_gold.tsv")) + " --out " +
            q(f.dir.file("report.tsv")));
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "line 2"));
    }
}

TEST_CASE("sweep replays the threshold filter") {
    MineFixture f;
    const RunResult mined = run_cli(f.mine_args(
        "mined.tsv", "--dump-candidates " + q(f.dir.file("cands.bin"))));
    REQUIRE(mined.exit_code == 0);

    SUBCASE("range grammar produces one row per threshold") {
        const RunResult r = run_cli(
            "sweep --candidates " + q(f.dir.file("cands.bin")) + " --gold " +
            q(f.dir.file("gold.tsv")) +
            " --thresholds 1.00:1.10:0.01 --out " +
            q(f.dir.file("sweep.tsv")));
        CHECK(r.exit_code == 0);
        CHECK(contains(r.output, "sweep: 11 thresholds"));

        const auto lines = split_lines(slurp(f.dir.file("sweep.tsv")));
        REQUIRE(lines.size() == 12);
        CHECK(lines[0] == "threshold\tcount\tprecision\trecall\tf1");

        unsigned long long prev =
            std::numeric_limits<unsigned long long>::max();
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto fields = split_tabs(lines[i]);
            REQUIRE(fields.size() == 5);
            const unsigned long long count = std::stoull(fields[1]);
            CHECK(count <= prev);
            prev = count;
        }
        // Every planted pair clears the lowest threshold and is correct.
        const auto first = split_tabs(lines[1]);
        CHECK(first[0] == "1.0000");
        CHECK(first[1] == "10");
        CHECK(first[2] == "1.0000");
        CHECK(first[3] == "1.0000");
    }

    SUBCASE("without gold the metric columns are zero") {
        const RunResult r = run_cli(
            "sweep --candidates " + q(f.dir.file("cands.bin")) +
            " --thresholds 1.00,1.05 --out " + q(f.dir.file("sweep.tsv")));
        CHECK(r.exit_code == 0);
        const auto lines = split_lines(slurp(f.dir.file("sweep.tsv")));
        REQUIRE(lines.size() == 3);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto fields = split_tabs(lines[i]);
            REQUIRE(fields.size() == 5);
            CHECK(fields[2] == "0.0000");
            CHECK(fields[3] == "0.0000");
            CHECK(fields[4] == "0.0000");
        }
    }

    SUBCASE("threshold lists must be ascending") {
        const RunResult r = run_cli(
            "sweep --candidates " + q(f.dir.file("cands.bin")) +
            " --thresholds 1.05,1.01 --out " + q(f.dir.file("sweep.tsv")));
        CHECK(r.exit_code == 2);
        CHECK(contains(r.output, "error:"));
    }

    SUBCASE("range grammar errors are usage errors") {
        for (const std::string bad :
             {"1.0:0.9:0.01", "1.0:1.1:0", "1.0:1.1:0.01:9", "a:1.1:0.01"}) {
            const RunResult r = run_cli(
                "sweep --candidates " + q(f.dir.file("cands.bin")) +
                " --thresholds " + bad + " --out " +
                q(f.dir.file("sweep.tsv")));
            CHECK(r.exit_code == 2);
        }
    }
}

int main(int argc, char** argv) {
    // The harness appends the binary path after any doctest options.
    if (argc > 1 && argv[argc - 1][0] != '-') {
        g_cli = argv[argc - 1];
        --argc;
    }
    if (g_cli.empty()) {
        std::fprintf(stderr,
                     "usage: cli_tests [doctest options] <binary path>\n");
        return 1;
    }
    doctest::Context context(argc, argv);
    return context.run();
}
