#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "albias/alcore.hpp"
#include "albias/corpus.hpp"
#include "albias/error.hpp"
#include "albias/json_io.hpp"
#include "albias/runlog.hpp"

// Command implementations behind the `al` tool. Argument parsing lives in tools/al.cpp;
// everything here takes plain structs so the commands are testable in-process.
namespace albias::cli {

/// Process exit code for an error category: usage 2, data 3, compute 4.
int exit_code(ErrorKind kind);

struct GenSynthOptions {
    SyntheticSpec spec;
    /// Documents per class in test.csv, drawn with derive_seed(seed, 1); 0 skips the test split.
    std::size_t test_docs_per_class = 0;
    std::filesystem::path out;
};

/// Writes a corpus directory (train.csv, optional test.csv, classes.txt).
void gen_synth(const GenSynthOptions& options);

struct RunOptions {
    std::filesystem::path corpus;  // corpus directory
    std::optional<std::size_t> num_classes;
    al::LoopConfig config;
};

/// Loads the corpus directory and runs one active-learning loop.
al::RunLog run(const RunOptions& options);

/// A declarative sweep. Every combination of strategy x seed x (K, b) is one run.
struct ExperimentPlan {
    std::filesystem::path corpus;
    std::optional<std::size_t> num_classes;
    al::ModelFamily model = al::ModelFamily::FText;
    std::vector<al::Strategy> strategies;
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<std::size_t, std::size_t>> queries;  // (K, b)
    std::optional<std::size_t> init_size;
    std::size_t ensemble_size = 5;
    std::optional<std::size_t> delete_count;
    ftext::FtTrainConfig ftext;
    nbayes::TfidfOptions tfidf;
    std::filesystem::path out;

    /// Throws UsageError on duplicate seeds, empty lists, or a (K, b) that overflows n.
    void validate(std::size_t n) const;
    std::vector<al::LoopConfig> expand() const;
};

/// Parses the plan format (see README): `[plan]`, `[ftext]` and `[nbayes]` sections of
/// `key = value` lines, `#` comments. Relative paths resolve against `base_dir`.
ExperimentPlan parse_plan(std::string_view text, const std::filesystem::path& base_dir);
ExperimentPlan load_plan(const std::filesystem::path& path);

struct SweepResult {
    std::vector<std::filesystem::path> logs;  // in expand() order
    Json report;
};

/// Runs every configuration (in parallel), writes out/runs/<label>.jsonl, out/report.json
/// and out/curves.csv.
SweepResult sweep(const ExperimentPlan& plan);

/// Intersection tables over a set of completed runs: seed pairs per (strategy, K, b),
/// query-size pairs per (strategy, seed), strategy pairs per (K, b).
Json sweep_report(std::span<const al::RunLog> logs);

/// Context tag for a set of run logs: seed-pair, query-size-pair, strategy-pair,
/// model-pair or mixed, depending on which settings vary.
std::string infer_context(std::span<const al::RunLog> logs);

enum class DiagnoseKind { ClassBias, Intersection, Calibration, Curves };
DiagnoseKind parse_diagnose_kind(std::string_view name);

struct DiagnoseOptions {
    DiagnoseKind kind = DiagnoseKind::Intersection;
    std::vector<std::filesystem::path> logs;
    std::optional<std::filesystem::path> corpus;  // class-bias only; defaults to the log's source
    std::optional<std::size_t> num_classes;
    std::optional<std::filesystem::path> out;
};

/// Builds the report. With `out` set, writes report.json (and curves.csv for curves);
/// otherwise the report (or, for curves, the CSV) goes to `stdout_sink`.
Json diagnose(const DiagnoseOptions& options, std::ostream& stdout_sink);

struct SvmOverlapOptions {
    std::filesystem::path log;
    std::optional<std::filesystem::path> corpus;
    std::optional<std::size_t> num_classes;
    std::optional<std::filesystem::path> out;
};

/// Trains ftext on the whole training split (run's ftext settings, seed model_seed(seed, 0, 0)),
/// fits the one-vs-one SVM on its sentence embeddings and compares the support set with
/// the run's acquired set.
Json svm_overlap(const SvmOverlapOptions& options, std::ostream& stdout_sink);

struct ExportOptions {
    std::filesystem::path log;
    std::optional<std::filesystem::path> corpus;
    std::optional<std::size_t> num_classes;
    std::filesystem::path out;
};

/// Exports the acquired set of a run as surrogate.csv + manifest.json. Each id carries
/// the round that last selected it and its acquisition score there.
SurrogateManifest export_run(const ExportOptions& options);

}  // namespace albias::cli
