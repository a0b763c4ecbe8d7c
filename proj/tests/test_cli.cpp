#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "albias/cli.hpp"
#include "albias/diagnostics.hpp"
#include "test_util.hpp"

using namespace albias;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::filesystem::path small_corpus(const std::filesystem::path& root) {
    cli::GenSynthOptions g;
    g.spec.num_classes = 4;
    g.spec.docs_per_class = 100;
    g.spec.seed = 5;
    g.test_docs_per_class = 20;
    g.out = root / "corpus";
    cli::gen_synth(g);
    return g.out;
}

}  // namespace

TEST_CASE("exit codes by error kind") {
    CHECK(cli::exit_code(ErrorKind::Usage) == 2);
    CHECK(cli::exit_code(ErrorKind::Data) == 3);
    CHECK(cli::exit_code(ErrorKind::Compute) == 4);
}

TEST_CASE("parse_plan") {
    const std::string text =
        "# constant budget sweep\n"
        "[plan]\n"
        "corpus = data\n"
        "model = ftext\n"
        "strategies = entropy, lc\n"
        "seeds = 1, 2, 3\n"
        "total = 360\n"
        "rounds = 9, 19, 39\n"
        "init_size = 40\n"
        "out = results\n"
        "\n"
        "[ftext]\n"
        "dim = 10\n"
        "lr = 0.5\n"
        "[nbayes]\n"
        "remove_stop_words = false\n";
    const cli::ExperimentPlan p = cli::parse_plan(text, "/base");
    CHECK(p.corpus == std::filesystem::path("/base/data"));
    CHECK(p.out == std::filesystem::path("/base/results"));
    CHECK(p.strategies == std::vector<al::Strategy>{al::Strategy::Entropy, al::Strategy::LeastConfidence});
    CHECK(p.seeds == std::vector<std::uint64_t>{1, 2, 3});
    const std::vector<std::pair<std::size_t, std::size_t>> q{{40, 9}, {19, 19}, {9, 39}};
    CHECK(p.queries == q);
    CHECK(p.init_size == 40u);
    CHECK(p.ftext.dim == 10);
    CHECK(p.ftext.initial_lr == 0.5);
    CHECK_FALSE(p.tfidf.remove_stop_words);

    const auto configs = p.expand();
    REQUIRE(configs.size() == 18);
    CHECK(configs[0].acquisition.kind == al::Strategy::Entropy);
    CHECK(configs[0].query_size == 40);
    CHECK(configs[0].seed == 1);
    CHECK(configs[1].seed == 2);
    CHECK(configs[3].query_size == 19);
    CHECK(configs[9].acquisition.kind == al::Strategy::LeastConfidence);
    CHECK(configs[0].ftext.dim == 10);

    SUBCASE("explicit queries") {
        const auto e = cli::parse_plan("[plan]\ncorpus=c\nout=o\nstrategies=random\nseeds=4\nqueries=40x9, 19x19\n", "");
        CHECK(e.queries.size() == 2);
        CHECK(e.queries[1] == std::pair<std::size_t, std::size_t>{19, 19});
    }
}

TEST_CASE("parse_plan errors") {
    const std::string base = "[plan]\ncorpus=c\nout=o\nstrategies=entropy\nseeds=1\nqueries=10x2\n";
    CHECK_NOTHROW(cli::parse_plan(base, ""));
    CHECK_THROWS_AS(cli::parse_plan(base + "seeds=2\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan(base + "colour=red\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan(base + "[other]\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan(base + "[plan\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan("corpus=c\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan(base + "total=90\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan(base + "init_size=ten\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan("[plan]\nout=o\nstrategies=entropy\nseeds=1\nqueries=10x2\n", ""), UsageError);
    CHECK_THROWS_AS(cli::parse_plan("[plan]\ncorpus=c\nout=o\nstrategies=bogus\nseeds=1\nqueries=10x2\n", ""),
                    UsageError);
    CHECK_THROWS_AS(cli::parse_plan("[plan]\ncorpus=c\nout=o\nstrategies=entropy\nseeds=1\nqueries=10-2\n", ""),
                    UsageError);
    CHECK_THROWS_AS(cli::load_plan("/nonexistent/plan.ini"), UsageError);

    cli::ExperimentPlan p = cli::parse_plan("[plan]\ncorpus=c\nout=o\nstrategies=entropy\nseeds=1,1\nqueries=10x2\n", "");
    CHECK_THROWS_AS(p.validate(100), UsageError);
    p.seeds = {1};
    CHECK_NOTHROW(p.validate(100));
    CHECK_THROWS_AS(p.validate(25), UsageError);
}

TEST_CASE("run is deterministic and labels its source") {
    const test_util::TempDir dir;
    cli::RunOptions o;
    o.corpus = small_corpus(dir.path());
    o.config.query_size = 10;
    o.config.rounds = 3;
    o.config.seed = 2;
    o.config.ftext.epochs = 3;
    const al::RunLog a = cli::run(o);
    const al::RunLog b = cli::run(o);
    CHECK(al::to_jsonl(a) == al::to_jsonl(b));
    CHECK(a.source == o.corpus.generic_string());
    CHECK(al::acquired_set(a.result.state).size() == 30);
    CHECK(a.result.curve.size() == 4);

    o.corpus = dir.path() / "missing";
    CHECK_THROWS_AS(cli::run(o), DataError);
}

TEST_CASE("sweep at constant b x K writes logs, report and curves") {
    const test_util::TempDir dir;
    const auto corpus = small_corpus(dir.path());
    write_file(dir.path() / "plan.ini",
               "[plan]\ncorpus = corpus\nstrategies = entropy\nseeds = 1, 2, 3\ntotal = 90\nrounds = 9, 19, 39\n"
               "init_size = 20\nout = sweep\n[ftext]\nepochs = 3\ndim = 8\n");
    const cli::ExperimentPlan plan = cli::load_plan(dir.path() / "plan.ini");
    CHECK(plan.corpus == corpus);
    const cli::SweepResult r = cli::sweep(plan);

    REQUIRE(r.logs.size() == 9);
    for (const auto& p : r.logs) CHECK(std::filesystem::exists(p));
    CHECK(std::filesystem::exists(dir.path() / "sweep" / "report.json"));
    CHECK(std::filesystem::exists(dir.path() / "sweep" / "curves.csv"));

    const Json& j = r.report;
    CHECK(j["kind"] == "sweep");
    CHECK(j["n_pool"] == 400);
    CHECK(j["runs"].size() == 9);
    CHECK(j["seed_pairs"].size() == 3);
    REQUIRE(j["query_size_pairs"].size() == 3);
    for (const Json& g : j["query_size_pairs"]) {
        CHECK(g["summary"]["context"] == "query-size-pair");
        CHECK(g["summary"]["pairs"].size() == 3);
    }
    CHECK(j["strategy_pairs"].empty());

    const auto groups = diag::parse_curves_csv(test_util::read(dir.path() / "sweep" / "curves.csv"));
    CHECK(groups.size() == 9);

    // re-running reproduces every log byte for byte
    std::vector<std::string> first;
    for (const auto& p : r.logs) first.push_back(test_util::read(p));
    const cli::SweepResult again = cli::sweep(plan);
    for (std::size_t i = 0; i < again.logs.size(); ++i) CHECK(test_util::read(again.logs[i]) == first[i]);
}

TEST_CASE("diagnose, svm-overlap and export on run logs") {
    const test_util::TempDir dir;
    cli::RunOptions o;
    o.corpus = small_corpus(dir.path());
    o.config.query_size = 10;
    o.config.rounds = 4;
    o.config.ftext.epochs = 3;
    std::vector<std::filesystem::path> logs;
    for (std::uint64_t seed : {1, 2}) {
        o.config.seed = seed;
        logs.push_back(dir.path() / ("run" + std::to_string(seed) + ".jsonl"));
        al::write_run_log(cli::run(o), logs.back());
    }
    CHECK(cli::infer_context(std::vector<al::RunLog>{al::read_run_log(logs[0]), al::read_run_log(logs[1])}) ==
          "seed-pair");

    std::ostringstream sink;
    cli::DiagnoseOptions d;
    d.logs = logs;

    SUBCASE("class-bias") {
        d.kind = cli::parse_diagnose_kind("class-bias");
        const Json j = cli::diagnose(d, sink);
        CHECK(j["kind"] == "class-bias");
        CHECK(j["limit"].get<double>() == doctest::Approx(std::log(4.0)));
        CHECK(j["runs"].size() == 2);
        CHECK(j["runs"][0]["per_query"].contains("mean"));
        CHECK(j["final_sample"]["mean"].get<double>() <= std::log(4.0) + 1e-12);
        CHECK(Json::parse(sink.str()) == j);
    }
    SUBCASE("intersection") {
        d.kind = cli::DiagnoseKind::Intersection;
        d.out = dir.path() / "inter";
        const Json j = cli::diagnose(d, sink);
        CHECK(j["kind"] == "intersection");
        CHECK(std::filesystem::exists(dir.path() / "inter" / "report.json"));
        CHECK(sink.str().empty());
    }
    SUBCASE("curves to stdout") {
        d.kind = cli::DiagnoseKind::Curves;
        cli::diagnose(d, sink);
        CHECK(diag::parse_curves_csv(sink.str()).size() == 2);
    }
    SUBCASE("calibration") {
        d.kind = cli::DiagnoseKind::Calibration;
        const Json j = cli::diagnose(d, sink);
        CHECK(j["kind"] == "calibration");
    }
    SUBCASE("unknown kind and no logs") {
        CHECK_THROWS_AS(cli::parse_diagnose_kind("bias"), UsageError);
        d.logs.clear();
        CHECK_THROWS_AS(cli::diagnose(d, sink), UsageError);
    }
    SUBCASE("svm-overlap") {
        cli::SvmOverlapOptions s;
        s.log = logs[0];
        const Json j = cli::svm_overlap(s, sink);
        CHECK(j["kind"] == "svm-overlap");
        CHECK(j["overlap"]["context"] == "svm-support");
        CHECK(j["overlap"]["chance_pct"].get<double>() > 0);
    }
    SUBCASE("export-surrogate") {
        cli::ExportOptions e;
        e.log = logs[1];
        e.out = dir.path() / "surrogate";
        const SurrogateManifest m = cli::export_run(e);
        CHECK(m.per_id.size() == 40);
        CHECK(m.compression_ratio == doctest::Approx(40.0 / 400.0));
        const LabeledCorpus back = load_csv(e.out / "surrogate.csv", 4);
        CHECK(back.size() == 40);
    }
}
