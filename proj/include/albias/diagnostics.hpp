#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "albias/alcore.hpp"
#include "albias/calibration.hpp"
#include "albias/corpus.hpp"
#include "albias/json_io.hpp"
#include "albias/runlog.hpp"

// Sampling-bias and stability measurements over completed runs.
namespace albias::diag {

using LabelHistogram = std::vector<std::size_t>;

LabelHistogram histogram(const LabeledCorpus& corpus, std::span<const DocId> ids);

/// ln C - KL(uniform || P̂) in nats, with P̂ floored at 1e-12 inside the logarithm.
/// Equals ln C exactly for a uniform histogram. Throws on an all-zero histogram.
double label_entropy(std::span<const std::size_t> counts);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

/// Label entropy of each round's query, aggregated over rounds.
MeanStd per_query_label_entropy(const al::AlState& state, const LabeledCorpus& corpus);

/// Label entropy of the acquired set (final train set minus S_0).
double final_sample_label_entropy(const al::AlState& state, const LabeledCorpus& corpus);

/// 100 * |a ∩ b| / |a|. Throws on empty a.
double overlap_pct(std::span<const DocId> a, std::span<const DocId> b);

/// Expected overlap_pct of independent uniform subsets: 100 * size_b / n_pool.
double chance_overlap(std::size_t n_pool, std::size_t size_a, std::size_t size_b);

struct OverlapStat {
    double observed = 0.0;
    double chance = 0.0;
    std::size_t size_a = 0;
    std::size_t size_b = 0;
    std::string context;  // seed-pair, query-size-pair, strategy-pair, model-pair, ...
    std::string label_a;
    std::string label_b;
};

OverlapStat compare_sets(std::span<const DocId> a, std::span<const DocId> b, std::size_t n_pool, std::string context,
                         std::string label_a = {}, std::string label_b = {});

struct OverlapSummary {
    std::string context;
    MeanStd observed;
    MeanStd chance;
    std::vector<OverlapStat> pairs;
};

/// Every unordered pair (i < j) of `sets`, in enumeration order.
OverlapSummary pairwise_overlap(std::span<const std::vector<DocId>> sets, std::span<const std::string> labels,
                                std::size_t n_pool, std::string context);

/// Cross pairs a_i vs b_j for all i, j.
OverlapSummary cross_overlap(std::span<const std::vector<DocId>> a, std::span<const std::string> labels_a,
                             std::span<const std::vector<DocId>> b, std::span<const std::string> labels_b,
                             std::size_t n_pool, std::string context);

struct CurveGroup {
    std::string strategy;
    std::uint64_t seed = 0;
    std::vector<al::CurvePoint> points;

    friend bool operator==(const CurveGroup&, const CurveGroup&) = default;
};

CurveGroup curve_of(const al::RunLog& log);

/// Plot data with header fraction_labeled,accuracy,strategy,seed; doubles in
/// shortest round-trip form.
std::string curves_csv(std::span<const CurveGroup> groups);
/// Inverse of curves_csv; train sizes are not stored and come back as 0.
std::vector<CurveGroup> parse_curves_csv(std::string_view text);

inline constexpr const char* kReportFormat = "albias-report";
inline constexpr int kReportVersion = 1;

Json report_header(std::string_view kind);
Json to_json(const MeanStd& v);
Json to_json(const OverlapStat& s);
Json to_json(const OverlapSummary& s);

/// ∩Q (mean, std) and ∩S per run plus their means across runs.
Json class_bias_report(std::span<const al::RunLog> logs, const LabeledCorpus& corpus);
/// Final-model calibration of each run that had a test corpus.
Json calibration_report(std::span<const al::RunLog> logs);
/// All unordered pairs of the runs' acquired sets.
Json intersection_report(std::span<const al::RunLog> logs, std::string context);

/// Writes out_dir/report.json and, when groups are given, out_dir/curves.csv.
void emit_report(const Json& report, std::span<const CurveGroup> groups, const std::filesystem::path& out_dir);

std::string run_label(const al::RunLog& log);

}  // namespace albias::diag
