#include "albias/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "albias/diagnostics.hpp"
#include "albias/parallel.hpp"
#include "albias/random.hpp"
#include "albias/svmlin.hpp"

namespace albias::cli {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const std::string item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw UsageError("plan: '" + text + "' is not a valid value for " + what);
    }
    return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw UsageError("plan: '" + text + "' is not a boolean for " + what);
}

void make_dirs(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

CorpusBundle load_bundle(const std::filesystem::path& dir, std::optional<std::size_t> num_classes) {
    return load_corpus_dir(dir, num_classes);
}

/// The corpus a log was run on: the explicit path, else the log's recorded source.
LabeledCorpus corpus_for(const al::RunLog& log, const std::optional<std::filesystem::path>& corpus,
                         std::optional<std::size_t> num_classes) {
    const std::filesystem::path dir = corpus ? *corpus : std::filesystem::path(log.source);
    LabeledCorpus train = load_bundle(dir, num_classes ? num_classes : std::optional(log.num_classes)).train;
    if (train.size() != log.result.state.corpus_size) {
        throw DataError("corpus " + dir.string() + " has " + std::to_string(train.size()) +
                        " documents but the run log expects " + std::to_string(log.result.state.corpus_size));
    }
    return train;
}

void emit(const Json& report, const std::optional<std::filesystem::path>& out, std::ostream& sink) {
    if (out) {
        diag::emit_report(report, {}, *out);
    } else {
        sink << report.dump(2) << "\n";
    }
}

Json loop_identity(const al::LoopConfig& c) {
    return Json{{"strategy", al::strategy_name(c.acquisition.kind)},
                {"model", al::model_name(c.model)},
                {"k", c.query_size},
                {"rounds", c.rounds},
                {"seed", c.seed}};
}

}  // namespace

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Compute: return 4;
    }
    return 4;
}

void gen_synth(const GenSynthOptions& options) {
    CorpusBundle bundle{generate_synthetic(options.spec), std::nullopt};
    if (options.test_docs_per_class > 0) {
        SyntheticSpec test = options.spec;
        test.docs_per_class = options.test_docs_per_class;
        test.seed = derive_seed(options.spec.seed, 1);
        bundle.test = generate_synthetic(test);
    }
    write_corpus_dir(bundle, options.out);
}

al::RunLog run(const RunOptions& options) {
    const CorpusBundle bundle = load_bundle(options.corpus, options.num_classes);
    al::RunLog log;
    log.source = options.corpus.generic_string();
    log.num_classes = bundle.train.num_classes();
    if (bundle.test) log.test_size = bundle.test->size();
    log.result = al::run_loop(bundle.train, bundle.test ? &*bundle.test : nullptr, options.config);
    return log;
}

void ExperimentPlan::validate(std::size_t n) const {
    if (strategies.empty()) throw UsageError("plan: no strategies");
    if (seeds.empty()) throw UsageError("plan: no seeds");
    if (queries.empty()) throw UsageError("plan: no (K, b) pairs");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw UsageError("plan: seeds must be distinct");
    }
    for (const al::LoopConfig& c : expand()) c.validate(n);
}

std::vector<al::LoopConfig> ExperimentPlan::expand() const {
    std::vector<al::LoopConfig> out;
    for (al::Strategy s : strategies) {
        for (const auto& [k, b] : queries) {
            for (std::uint64_t seed : seeds) {
                al::LoopConfig c;
                c.query_size = k;
                c.rounds = b;
                c.init_size = init_size;
                c.seed = seed;
                c.model = model;
                c.acquisition.kind = s;
                c.acquisition.ensemble_size = ensemble_size;
                c.acquisition.delete_count = delete_count;
                c.ftext = ftext;
                c.tfidf = tfidf;
                out.push_back(c);
            }
        }
    }
    return out;
}

ExperimentPlan parse_plan(std::string_view text, const std::filesystem::path& base_dir) {
    ExperimentPlan plan;
    std::optional<std::size_t> total;
    std::vector<std::size_t> rounds;
    std::string section;
    std::set<std::string> seen;
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        const std::string where = "plan line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError(where + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section != "plan" && section != "ftext" && section != "nbayes") {
                throw UsageError(where + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
        if (section.empty()) throw UsageError(where + ": key outside any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!seen.insert(section + "." + key).second) throw UsageError(where + ": duplicate key " + key);

        if (section == "plan") {
            if (key == "corpus") {
                plan.corpus = resolve(value);
            } else if (key == "num_classes") {
                plan.num_classes = parse_number<std::size_t>(value, key);
            } else if (key == "model") {
                plan.model = al::parse_model(value);
            } else if (key == "strategies") {
                for (const std::string& s : split_list(value)) plan.strategies.push_back(al::parse_strategy(s));
            } else if (key == "seeds") {
                for (const std::string& s : split_list(value)) plan.seeds.push_back(parse_number<std::uint64_t>(s, key));
            } else if (key == "queries") {
                for (const std::string& q : split_list(value)) {
                    const auto x = q.find('x');
                    if (x == std::string::npos) throw UsageError(where + ": queries entries look like KxB");
                    plan.queries.emplace_back(parse_number<std::size_t>(trim(q.substr(0, x)), "K"),
                                              parse_number<std::size_t>(trim(q.substr(x + 1)), "b"));
                }
            } else if (key == "total") {
                total = parse_number<std::size_t>(value, key);
            } else if (key == "rounds") {
                for (const std::string& s : split_list(value)) rounds.push_back(parse_number<std::size_t>(s, key));
            } else if (key == "init_size") {
                plan.init_size = parse_number<std::size_t>(value, key);
            } else if (key == "ensemble_size") {
                plan.ensemble_size = parse_number<std::size_t>(value, key);
            } else if (key == "delete_count") {
                plan.delete_count = parse_number<std::size_t>(value, key);
            } else if (key == "out") {
                plan.out = resolve(value);
            } else {
                throw UsageError(where + ": unknown key " + key + " in [plan]");
            }
        } else if (section == "ftext") {
            if (key == "dim") {
                plan.ftext.dim = parse_number<std::size_t>(value, key);
            } else if (key == "epochs") {
                plan.ftext.epochs = parse_number<std::size_t>(value, key);
            } else if (key == "lr") {
                plan.ftext.initial_lr = parse_number<double>(value, key);
            } else if (key == "bucket_count") {
                plan.ftext.bucket_count = parse_number<std::uint64_t>(value, key);
            } else {
                throw UsageError(where + ": unknown key " + key + " in [ftext]");
            }
        } else {
            if (key == "max_features") {
                plan.tfidf.max_features = parse_number<std::size_t>(value, key);
            } else if (key == "remove_stop_words") {
                plan.tfidf.remove_stop_words = parse_bool(value, key);
            } else {
                throw UsageError(where + ": unknown key " + key + " in [nbayes]");
            }
        }
    }

    if (total || !rounds.empty()) {
        if (!total || rounds.empty()) throw UsageError("plan: total and rounds must be given together");
        if (!plan.queries.empty()) throw UsageError("plan: give either queries or total + rounds, not both");
        for (std::size_t b : rounds) {
            if (b == 0) throw UsageError("plan: rounds must be positive");
            const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(*total) / static_cast<double>(b)));
            plan.queries.emplace_back(std::max<std::size_t>(k, 1), b);
        }
    }
    if (plan.corpus.empty()) throw UsageError("plan: missing corpus");
    if (plan.out.empty()) throw UsageError("plan: missing out");
    plan.ftext.validate();
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open plan file " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_plan(s.str(), path.parent_path());
}

std::string infer_context(std::span<const al::RunLog> logs) {
    std::set<std::string> strategies, models, sizes;
    std::set<std::uint64_t> seeds;
    for (const al::RunLog& log : logs) {
        const al::LoopConfig& c = log.result.state.config;
        strategies.insert(std::string(al::strategy_name(c.acquisition.kind)));
        models.insert(std::string(al::model_name(c.model)));
        sizes.insert(std::to_string(c.query_size) + "x" + std::to_string(c.rounds));
        seeds.insert(c.seed);
    }
    const int varying = (strategies.size() > 1) + (models.size() > 1) + (sizes.size() > 1);
    if (varying == 0) return "seed-pair";
    if (varying > 1) return "mixed";
    if (strategies.size() > 1) return "strategy-pair";
    if (models.size() > 1) return "model-pair";
    return "query-size-pair";
}

Json sweep_report(std::span<const al::RunLog> logs) {
    if (logs.empty()) throw UsageError("sweep report over no runs");
    const std::size_t n = logs.front().result.state.corpus_size;
    struct Run {
        std::string strategy;
        std::size_t k, b;
        std::uint64_t seed;
        std::vector<DocId> acquired;
        std::string label;
    };
    std::vector<Run> runs;
    for (const al::RunLog& log : logs) {
        const al::LoopConfig& c = log.result.state.config;
        runs.push_back({std::string(al::strategy_name(c.acquisition.kind)), c.query_size, c.rounds, c.seed,
                        al::acquired_set(log.result.state), diag::run_label(log)});
    }
    auto collect = [&](auto&& keep) {
        std::vector<std::vector<DocId>> sets;
        std::vector<std::string> labels;
        for (const Run& r : runs) {
            if (keep(r)) {
                sets.push_back(r.acquired);
                labels.push_back(r.label);
            }
        }
        return std::pair(sets, labels);
    };

    std::vector<std::string> strategies;
    std::vector<std::pair<std::size_t, std::size_t>> sizes;
    std::vector<std::uint64_t> seeds;
    for (const Run& r : runs) {
        if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) strategies.push_back(r.strategy);
        if (std::find(sizes.begin(), sizes.end(), std::pair(r.k, r.b)) == sizes.end()) sizes.emplace_back(r.k, r.b);
        if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);
    }

    Json report = diag::report_header("sweep");
    report["n_pool"] = n;
    Json runs_json = Json::array();
    for (const al::RunLog& log : logs) {
        Json r = loop_identity(log.result.state.config);
        r["run"] = diag::run_label(log);
        r["final_accuracy"] = log.result.state.final_accuracy ? Json(*log.result.state.final_accuracy) : Json(nullptr);
        runs_json.push_back(std::move(r));
    }
    report["runs"] = std::move(runs_json);

    Json seed_pairs = Json::array();
    if (seeds.size() > 1) {
        for (const std::string& s : strategies) {
            for (const auto& [k, b] : sizes) {
                auto [sets, labels] = collect([&](const Run& r) { return r.strategy == s && r.k == k && r.b == b; });
                if (sets.size() < 2) continue;
                seed_pairs.push_back({{"strategy", s}, {"k", k}, {"rounds", b},
                                      {"summary", diag::to_json(diag::pairwise_overlap(sets, labels, n, "seed-pair"))}});
            }
        }
    }
    report["seed_pairs"] = std::move(seed_pairs);

    Json size_pairs = Json::array();
    if (sizes.size() > 1) {
        for (const std::string& s : strategies) {
            for (std::uint64_t seed : seeds) {
                auto [sets, labels] = collect([&](const Run& r) { return r.strategy == s && r.seed == seed; });
                if (sets.size() < 2) continue;
                size_pairs.push_back({{"strategy", s}, {"seed", seed},
                                      {"summary", diag::to_json(diag::pairwise_overlap(sets, labels, n, "query-size-pair"))}});
            }
        }
    }
    report["query_size_pairs"] = std::move(size_pairs);

    Json strategy_pairs = Json::array();
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        for (std::size_t j = i + 1; j < strategies.size(); ++j) {
            for (const auto& [k, b] : sizes) {
                auto [sa, la] = collect([&](const Run& r) { return r.strategy == strategies[i] && r.k == k && r.b == b; });
                auto [sb, lb] = collect([&](const Run& r) { return r.strategy == strategies[j] && r.k == k && r.b == b; });
                if (sa.empty() || sb.empty()) continue;
                strategy_pairs.push_back(
                    {{"a", strategies[i]}, {"b", strategies[j]}, {"k", k}, {"rounds", b},
                     {"summary", diag::to_json(diag::cross_overlap(sa, la, sb, lb, n, "strategy-pair"))}});
            }
        }
    }
    report["strategy_pairs"] = std::move(strategy_pairs);
    return report;
}

SweepResult sweep(const ExperimentPlan& plan) {
    const CorpusBundle bundle = load_bundle(plan.corpus, plan.num_classes);
    plan.validate(bundle.train.size());
    const std::vector<al::LoopConfig> configs = plan.expand();

    std::vector<al::RunLog> logs(configs.size());
    parallel_for(configs.size(), [&](std::size_t i) {
        al::RunLog& log = logs[i];
        log.source = plan.corpus.generic_string();
        log.num_classes = bundle.train.num_classes();
        if (bundle.test) log.test_size = bundle.test->size();
        log.result = al::run_loop(bundle.train, bundle.test ? &*bundle.test : nullptr, configs[i]);
    });

    SweepResult result;
    make_dirs(plan.out / "runs");
    std::vector<diag::CurveGroup> groups;
    for (const al::RunLog& log : logs) {
        const std::filesystem::path path = plan.out / "runs" / (diag::run_label(log) + ".jsonl");
        al::write_run_log(log, path);
        result.logs.push_back(path);
        if (!log.result.curve.empty()) groups.push_back(diag::curve_of(log));
    }
    result.report = sweep_report(logs);
    diag::emit_report(result.report, groups, plan.out);
    return result;
}

DiagnoseKind parse_diagnose_kind(std::string_view name) {
    if (name == "class-bias") return DiagnoseKind::ClassBias;
    if (name == "intersection") return DiagnoseKind::Intersection;
    if (name == "calibration") return DiagnoseKind::Calibration;
    if (name == "curves") return DiagnoseKind::Curves;
    throw UsageError("unknown diagnosis '" + std::string(name) + "' (class-bias, intersection, calibration, curves)");
}

Json diagnose(const DiagnoseOptions& options, std::ostream& sink) {
    if (options.logs.empty()) throw UsageError("diagnose needs at least one run log");
    std::vector<al::RunLog> logs;
    for (const auto& p : options.logs) logs.push_back(al::read_run_log(p));

    switch (options.kind) {
        case DiagnoseKind::ClassBias: {
            const LabeledCorpus corpus = corpus_for(logs.front(), options.corpus, options.num_classes);
            const Json report = diag::class_bias_report(logs, corpus);
            emit(report, options.out, sink);
            return report;
        }
        case DiagnoseKind::Intersection: {
            const Json report = diag::intersection_report(logs, infer_context(logs));
            emit(report, options.out, sink);
            return report;
        }
        case DiagnoseKind::Calibration: {
            const Json report = diag::calibration_report(logs);
            emit(report, options.out, sink);
            return report;
        }
        case DiagnoseKind::Curves: {
            std::vector<diag::CurveGroup> groups;
            Json report = diag::report_header("curves");
            Json runs = Json::array();
            for (const al::RunLog& log : logs) {
                if (log.result.curve.empty()) throw DataError("run " + diag::run_label(log) + " has no accuracy curve");
                groups.push_back(diag::curve_of(log));
                runs.push_back(diag::run_label(log));
            }
            report["runs"] = std::move(runs);
            if (options.out) {
                diag::emit_report(report, groups, *options.out);
            } else {
                sink << diag::curves_csv(groups);
            }
            return report;
        }
    }
    throw UsageError("unknown diagnosis");
}

Json svm_overlap(const SvmOverlapOptions& options, std::ostream& sink) {
    const al::RunLog log = al::read_run_log(options.log);
    const LabeledCorpus corpus = corpus_for(log, options.corpus, options.num_classes);
    const al::LoopConfig& cfg = log.result.state.config;

    std::vector<DocId> ids(corpus.size());
    std::vector<ClassId> labels(corpus.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ids[i] = static_cast<DocId>(i);
        labels[i] = corpus[ids[i]].label;
    }
    ftext::FtTrainConfig fc = cfg.ftext;
    fc.seed = al::model_seed(cfg.seed, 0, 0);
    const ftext::FtModel model = ftext::train(corpus, ids, fc);
    const Matrix emb = model.sentence_embeddings(corpus, ids);
    svmlin::SvmConfig sc;
    sc.seed = cfg.seed;
    const svmlin::SvmModel svm = svmlin::train_svm(emb, labels, sc);

    const std::vector<DocId> supports = svmlin::support_ids(svm, ids);
    const std::vector<DocId> acquired = al::acquired_set(log.result.state);
    if (supports.empty()) throw ComputeError("the SVM found no support vectors");

    diag::OverlapStat stat;
    stat.context = "svm-support";
    stat.label_a = "support-vectors";
    stat.label_b = diag::run_label(log);
    stat.size_a = supports.size();
    stat.size_b = acquired.size();
    stat.observed = svmlin::support_overlap(supports, acquired);
    stat.chance = diag::chance_overlap(corpus.size(), supports.size(), acquired.size());

    Json report = diag::report_header("svm-overlap");
    report["run"] = diag::run_label(log);
    report["n_pool"] = corpus.size();
    report["svm"] = {{"C", sc.C}, {"tolerance", sc.tolerance}, {"scheme", "ovo"}, {"support_threshold", sc.support_threshold}};
    Json pairs = Json::array();
    for (const svmlin::PairModel& p : svm.pairs()) {
        pairs.push_back({{"positive", p.positive}, {"negative", p.negative}, {"epochs", p.epochs},
                         {"converged", p.converged}, {"max_violation", p.max_violation}});
    }
    report["pairs"] = std::move(pairs);
    report["overlap"] = diag::to_json(stat);
    emit(report, options.out, sink);
    return report;
}

SurrogateManifest export_run(const ExportOptions& options) {
    const al::RunLog log = al::read_run_log(options.log);
    const LabeledCorpus corpus = corpus_for(log, options.corpus, options.num_classes);
    const al::AlState& st = log.result.state;
    const std::vector<DocId> acquired = al::acquired_set(st);

    std::map<DocId, SurrogateEntry> provenance;
    for (const al::QueryRecord& q : st.queries) {
        for (std::size_t i = 0; i < q.selected.size(); ++i) {
            const std::optional<double> score =
                st.config.acquisition.kind == al::Strategy::Random ? std::nullopt : std::optional(q.scores[i]);
            provenance[q.selected[i]] = {q.selected[i], q.round, score};
        }
    }
    std::vector<SurrogateEntry> entries;
    for (DocId id : acquired) {
        const auto it = provenance.find(id);
        if (it == provenance.end()) throw DataError("acquired id " + std::to_string(id) + " has no query record");
        entries.push_back(it->second);
    }
    SurrogateManifest m = make_manifest(log.source, std::string(al::strategy_name(st.config.acquisition.kind)),
                                        st.config.seed, st.config.rounds, std::move(entries), corpus.size());
    export_surrogate(corpus, acquired, m, options.out);
    return m;
}

}  // namespace albias::cli
