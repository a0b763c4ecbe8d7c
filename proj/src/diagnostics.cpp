#include "albias/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "albias/error.hpp"

namespace albias::diag {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError("bad number in curves CSV: " + std::string(s));
    return v;
}

std::vector<DocId> sorted_unique(std::span<const DocId> ids) {
    std::vector<DocId> v(ids.begin(), ids.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

LabelHistogram histogram(const LabeledCorpus& corpus, std::span<const DocId> ids) {
    LabelHistogram h(corpus.num_classes(), 0);
    for (DocId id : ids) ++h[corpus[id].label];
    return h;
}

double label_entropy(std::span<const std::size_t> counts) {
    if (counts.empty()) throw ComputeError("label entropy of an empty histogram");
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    if (total == 0) throw ComputeError("label entropy of an all-zero histogram");
    const double classes = static_cast<double>(counts.size());
    const double uniform = 1.0 / classes;
    double kl = 0.0;
    for (std::size_t c : counts) {
        const double p = std::max(static_cast<double>(c) / static_cast<double>(total), kProbabilityFloor);
        kl += uniform * std::log(uniform / p);
    }
    return std::log(classes) - kl;
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) return {};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

MeanStd per_query_label_entropy(const al::AlState& state, const LabeledCorpus& corpus) {
    std::vector<double> per_round;
    per_round.reserve(state.queries.size());
    for (const al::QueryRecord& q : state.queries) {
        if (q.selected.empty()) continue;
        per_round.push_back(label_entropy(histogram(corpus, q.selected)));
    }
    return mean_std(per_round);
}

double final_sample_label_entropy(const al::AlState& state, const LabeledCorpus& corpus) {
    return label_entropy(histogram(corpus, al::acquired_set(state)));
}

double overlap_pct(std::span<const DocId> a, std::span<const DocId> b) {
    const std::vector<DocId> sa = sorted_unique(a);
    if (sa.empty()) throw ComputeError("overlap with an empty reference set");
    const std::vector<DocId> sb = sorted_unique(b);
    std::vector<DocId> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    return 100.0 * static_cast<double>(common.size()) / static_cast<double>(sa.size());
}

double chance_overlap(std::size_t n_pool, std::size_t size_a, std::size_t size_b) {
    if (n_pool == 0 || size_a > n_pool || size_b > n_pool) throw ComputeError("set sizes exceed the pool");
    return 100.0 * static_cast<double>(size_b) / static_cast<double>(n_pool);
}

OverlapStat compare_sets(std::span<const DocId> a, std::span<const DocId> b, std::size_t n_pool, std::string context,
                         std::string label_a, std::string label_b) {
    OverlapStat s;
    s.size_a = sorted_unique(a).size();
    s.size_b = sorted_unique(b).size();
    s.observed = overlap_pct(a, b);
    s.chance = chance_overlap(n_pool, s.size_a, s.size_b);
    s.context = std::move(context);
    s.label_a = std::move(label_a);
    s.label_b = std::move(label_b);
    return s;
}

namespace {

OverlapSummary summarize(std::vector<OverlapStat> pairs, std::string context) {
    OverlapSummary out;
    out.context = std::move(context);
    std::vector<double> observed, chance;
    for (const OverlapStat& p : pairs) {
        observed.push_back(p.observed);
        chance.push_back(p.chance);
    }
    out.observed = mean_std(observed);
    out.chance = mean_std(chance);
    out.pairs = std::move(pairs);
    return out;
}

std::string label_at(std::span<const std::string> labels, std::size_t i) {
    return i < labels.size() ? labels[i] : std::to_string(i);
}

}  // namespace

OverlapSummary pairwise_overlap(std::span<const std::vector<DocId>> sets, std::span<const std::string> labels,
                                std::size_t n_pool, std::string context) {
    std::vector<OverlapStat> pairs;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            pairs.push_back(compare_sets(sets[i], sets[j], n_pool, context, label_at(labels, i), label_at(labels, j)));
        }
    }
    return summarize(std::move(pairs), std::move(context));
}

OverlapSummary cross_overlap(std::span<const std::vector<DocId>> a, std::span<const std::string> labels_a,
                             std::span<const std::vector<DocId>> b, std::span<const std::string> labels_b,
                             std::size_t n_pool, std::string context) {
    std::vector<OverlapStat> pairs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            pairs.push_back(compare_sets(a[i], b[j], n_pool, context, label_at(labels_a, i), label_at(labels_b, j)));
        }
    }
    return summarize(std::move(pairs), std::move(context));
}

CurveGroup curve_of(const al::RunLog& log) {
    const al::LoopConfig& c = log.result.state.config;
    return {std::string(al::strategy_name(c.acquisition.kind)), c.seed, log.result.curve};
}

std::string curves_csv(std::span<const CurveGroup> groups) {
    std::string out = "fraction_labeled,accuracy,strategy,seed\n";
    for (const CurveGroup& g : groups) {
        for (const al::CurvePoint& p : g.points) {
            out += shortest(p.fraction) + "," + shortest(p.accuracy) + "," + g.strategy + "," + std::to_string(g.seed) +
                   "\n";
        }
    }
    return out;
}

std::vector<CurveGroup> parse_curves_csv(std::string_view text) {
    const std::vector<CsvRecord> rows = parse_csv(text);
    if (rows.empty() || rows.front() != CsvRecord{"fraction_labeled", "accuracy", "strategy", "seed"}) {
        throw DataError("curves CSV lacks the expected header");
    }
    std::vector<CurveGroup> groups;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const CsvRecord& row = rows[r];
        if (row.size() != 4) throw MalformedRow(r + 1, "expected 4 fields");
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(row[3].data(), row[3].data() + row[3].size(), seed);
        if (ec != std::errc() || ptr != row[3].data() + row[3].size()) throw MalformedRow(r + 1, "bad seed");
        if (groups.empty() || groups.back().strategy != row[2] || groups.back().seed != seed) {
            groups.push_back({row[2], seed, {}});
        }
        groups.back().points.push_back({0, parse_double(row[0]), parse_double(row[1])});
    }
    return groups;
}

Json report_header(std::string_view kind) {
    Json j;
    j["format"] = kReportFormat;
    j["version"] = kReportVersion;
    j["kind"] = kind;
    return j;
}

Json to_json(const MeanStd& v) { return Json{{"mean", v.mean}, {"std", v.std}}; }

Json to_json(const OverlapStat& s) {
    Json j;
    j["context"] = s.context;
    j["a"] = s.label_a;
    j["b"] = s.label_b;
    j["size_a"] = s.size_a;
    j["size_b"] = s.size_b;
    j["observed_pct"] = s.observed;
    j["chance_pct"] = s.chance;
    return j;
}

Json to_json(const OverlapSummary& s) {
    Json j;
    j["context"] = s.context;
    j["observed_pct"] = to_json(s.observed);
    j["chance_pct"] = to_json(s.chance);
    Json pairs = Json::array();
    for (const OverlapStat& p : s.pairs) pairs.push_back(to_json(p));
    j["pairs"] = std::move(pairs);
    return j;
}

std::string run_label(const al::RunLog& log) {
    const al::LoopConfig& c = log.result.state.config;
    return std::string(al::model_name(c.model)) + "-" + std::string(al::strategy_name(c.acquisition.kind)) + "-k" +
           std::to_string(c.query_size) + "-b" + std::to_string(c.rounds) + "-s" + std::to_string(c.seed);
}

Json class_bias_report(std::span<const al::RunLog> logs, const LabeledCorpus& corpus) {
    Json j = report_header("class-bias");
    j["limit"] = std::log(static_cast<double>(corpus.num_classes()));
    Json runs = Json::array();
    std::vector<double> q_means, s_values;
    for (const al::RunLog& log : logs) {
        const al::AlState& st = log.result.state;
        if (st.corpus_size != corpus.size()) throw DataError("run log " + run_label(log) + " does not match the corpus");
        const MeanStd q = per_query_label_entropy(st, corpus);
        const double s = final_sample_label_entropy(st, corpus);
        q_means.push_back(q.mean);
        s_values.push_back(s);
        runs.push_back({{"run", run_label(log)}, {"per_query", to_json(q)}, {"final_sample", s}});
    }
    j["runs"] = std::move(runs);
    j["per_query_mean"] = to_json(mean_std(q_means));
    j["final_sample"] = to_json(mean_std(s_values));
    return j;
}

Json calibration_report(std::span<const al::RunLog> logs) {
    Json j = report_header("calibration");
    j["conventions"] = "variation_ratio = mean(1 - max p); mean_std = mean population std of the probability vector";
    Json runs = Json::array();
    for (const al::RunLog& log : logs) {
        const auto& cal = log.result.state.final_calibration;
        runs.push_back({{"run", run_label(log)}, {"calibration", cal ? calibration_to_json(*cal) : Json(nullptr)}});
    }
    j["runs"] = std::move(runs);
    return j;
}

Json intersection_report(std::span<const al::RunLog> logs, std::string context) {
    if (logs.size() < 2) throw UsageError("an intersection report needs at least two run logs");
    const std::size_t n = logs.front().result.state.corpus_size;
    std::vector<std::vector<DocId>> sets;
    std::vector<std::string> labels;
    for (const al::RunLog& log : logs) {
        if (log.result.state.corpus_size != n) throw DataError("run logs come from corpora of different sizes");
        sets.push_back(al::acquired_set(log.result.state));
        labels.push_back(run_label(log));
    }
    Json j = report_header("intersection");
    j["n_pool"] = n;
    j["summary"] = to_json(pairwise_overlap(sets, labels, n, std::move(context)));
    return j;
}

void emit_report(const Json& report, std::span<const CurveGroup> groups, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    if (!groups.empty()) write_text(out_dir / "curves.csv", curves_csv(groups));
}

}  // namespace albias::diag
