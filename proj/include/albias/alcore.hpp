#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "albias/acquisition.hpp"
#include "albias/calibration.hpp"
#include "albias/corpus.hpp"
#include "albias/ftext.hpp"
#include "albias/nbayes.hpp"

// Pool-based active learning: S_0 ⊂ S_1 ⊂ ... ⊂ S_b grown by queries of size K.
namespace albias::al {

enum class Strategy {
    Random,
    Entropy,
    LeastConfidence,
    DelEntropy,
    DelLC,
    EnsembleEntropy,
    EnsembleLC,
    CoresetKCenter,
};

/// Command-line names: random, entropy, lc, del-entropy, del-lc, ens-entropy, ens-lc, coreset.
std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

enum class ModelFamily { FText, NBayes };

std::string_view model_name(ModelFamily m);
ModelFamily parse_model(std::string_view name);

struct AcquisitionSpec {
    Strategy kind = Strategy::Entropy;
    std::size_t ensemble_size = 5;
    /// Per-round deletions for the Del* kinds; defaults to floor(K / 2).
    std::optional<std::size_t> delete_count;

    bool is_ensemble() const noexcept;
    bool uses_deletion() const noexcept;
    /// True for kinds scored by entropy (LC otherwise, for uncertainty kinds).
    bool uses_entropy() const noexcept;
};

struct LoopConfig {
    std::size_t query_size = 1;   // K
    std::size_t rounds = 1;       // b
    std::optional<std::size_t> init_size;  // |S_0|, defaults to K
    std::uint64_t seed = 0;
    ModelFamily model = ModelFamily::FText;
    AcquisitionSpec acquisition;
    ftext::FtTrainConfig ftext;   // seed field is ignored; rounds derive their own
    nbayes::TfidfOptions tfidf;

    std::size_t initial_size() const noexcept { return init_size.value_or(query_size); }
    std::size_t deletion_count() const noexcept;
    /// Throws UsageError unless the config fits a pool of n documents.
    void validate(std::size_t n) const;
};

struct QueryRecord {
    std::size_t round = 0;               // 1-based
    std::size_t train_size = 0;          // |S_{round-1}|, the set the scoring model saw
    std::vector<DocId> selected;         // best first
    std::vector<double> scores;          // acquisition score of each selected id
    std::vector<DocId> deleted;          // Del* kinds only, least uncertain first
    std::optional<double> accuracy;      // test accuracy of the scoring model

    friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct CurvePoint {
    std::size_t train_size = 0;
    double fraction = 0.0;  // train_size / n
    double accuracy = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Train/pool partition with sorted, disjoint id lists.
struct Partition {
    std::vector<DocId> train;
    std::vector<DocId> pool;

    void acquire(std::span<const DocId> ids);
    void release(std::span<const DocId> ids);

    friend bool operator==(const Partition&, const Partition&) = default;
};

struct AlState {
    LoopConfig config;
    std::size_t corpus_size = 0;
    std::vector<DocId> initial_ids;            // S_0, sorted
    std::vector<std::vector<DocId>> train_sets;  // S_0 .. S_i, each sorted
    std::vector<QueryRecord> queries;
    Partition partition;                       // current S_i and pool
    std::optional<double> final_accuracy;      // model trained on the last train set
    std::optional<diag::CalibrationReport> final_calibration;
};

struct LoopResult {
    AlState state;
    std::vector<CurvePoint> curve;  // one point per train set S_0 .. S_b, empty without a test corpus
};

/// Draws S_0 uniformly without replacement: Rng(derive_seed(seed, 0)).sample(0..n-1, |S_0|).
/// The Random strategy draws each query as Rng(derive_seed(seed, 1)).sample(pool, K),
/// continuing one stream across rounds.
AlState initial_state(std::size_t corpus_size, const LoopConfig& config);

/// Removes the `count` least uncertain train ids (ties to the lower id) and returns
/// them to the pool. Returns the removed ids, least uncertain first.
std::vector<DocId> apply_deletion(AlState& state, std::span<const DocId> train_ids, std::span<const double> scores,
                                  std::size_t count);

/// Every round trains fresh model(s) on S_i, scores the pool, selects a query and,
/// for Del* kinds, evicts the least uncertain train points. Deterministic in
/// (corpus, config).
LoopResult run_loop(const LabeledCorpus& corpus, const LabeledCorpus* test, const LoopConfig& config);

/// Final train set minus S_0, sorted.
std::vector<DocId> acquired_set(const AlState& state);

/// Seed of ensemble member `member` in round `round`.
std::uint64_t model_seed(std::uint64_t run_seed, std::size_t round, std::size_t member);

}  // namespace albias::al
