#include "albias/alcore.hpp"

#include <algorithm>
#include <iterator>
#include <variant>

#include "albias/error.hpp"
#include "albias/parallel.hpp"
#include "albias/random.hpp"

namespace albias::al {

namespace {

constexpr std::uint64_t kInitialStream = 0;
constexpr std::uint64_t kRandomQueryStream = 1;
constexpr std::uint64_t kModelStreamBase = 1000;

struct StrategyName {
    Strategy kind;
    std::string_view name;
};

constexpr StrategyName kStrategyNames[] = {
    {Strategy::Random, "random"},         {Strategy::Entropy, "entropy"},
    {Strategy::LeastConfidence, "lc"},    {Strategy::DelEntropy, "del-entropy"},
    {Strategy::DelLC, "del-lc"},          {Strategy::EnsembleEntropy, "ens-entropy"},
    {Strategy::EnsembleLC, "ens-lc"},     {Strategy::CoresetKCenter, "coreset"},
};

// One trained member of a round's committee.
class FittedModel {
public:
    explicit FittedModel(ftext::FtModel m) : model_(std::move(m)) {}
    explicit FittedModel(nbayes::NbClassifier m) : model_(std::move(m)) {}

    Matrix proba(const LabeledCorpus& corpus, std::span<const DocId> ids) const {
        return std::visit([&](const auto& m) { return m.predict_proba(corpus, ids); }, model_);
    }

    Matrix embed(const LabeledCorpus& corpus, std::span<const DocId> ids) const {
        const auto* ft = std::get_if<ftext::FtModel>(&model_);
        if (!ft) throw UsageError("sentence embeddings need the ftext model");
        return ft->sentence_embeddings(corpus, ids);
    }

private:
    std::variant<ftext::FtModel, nbayes::NbClassifier> model_;
};

std::vector<FittedModel> fit_members(const LabeledCorpus& corpus, std::span<const DocId> train, const LoopConfig& config,
                                     std::size_t round, std::size_t members) {
    std::vector<std::optional<FittedModel>> slots(members);
    parallel_for(members, [&](std::size_t m) {
        if (config.model == ModelFamily::FText) {
            ftext::FtTrainConfig fc = config.ftext;
            fc.seed = model_seed(config.seed, round, m);
            slots[m].emplace(ftext::train(corpus, train, fc));
        } else {
            slots[m].emplace(nbayes::train(corpus, train, config.tfidf));
        }
    });
    std::vector<FittedModel> out;
    out.reserve(members);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

Matrix committee_proba(const std::vector<FittedModel>& members, const LabeledCorpus& corpus,
                       std::span<const DocId> ids) {
    std::vector<Matrix> outputs;
    outputs.reserve(members.size());
    for (const FittedModel& m : members) outputs.push_back(m.proba(corpus, ids));
    return outputs.size() == 1 ? std::move(outputs.front()) : ensemble_proba(outputs);
}

std::vector<DocId> all_ids(const LabeledCorpus& c) {
    std::vector<DocId> ids(c.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<DocId>(i);
    return ids;
}

double accuracy(const Matrix& probs, const LabeledCorpus& test) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const auto p = probs.row(i);
        const auto top = static_cast<ClassId>(std::max_element(p.begin(), p.end()) - p.begin());
        hits += top == test[static_cast<DocId>(i)].label ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(probs.rows);
}

std::vector<ClassId> labels_of(const LabeledCorpus& c) {
    std::vector<ClassId> y;
    y.reserve(c.size());
    for (const Document& d : c.documents()) y.push_back(d.label);
    return y;
}

std::vector<double> uncertainty(const Matrix& probs, bool entropy) {
    std::vector<double> s(probs.rows);
    for (std::size_t i = 0; i < probs.rows; ++i) s[i] = entropy ? score_entropy(probs.row(i)) : score_lc(probs.row(i));
    return s;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
    for (const auto& e : kStrategyNames) {
        if (e.kind == s) return e.name;
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    for (const auto& e : kStrategyNames) {
        if (e.name == name) return e.kind;
    }
    throw UsageError("unknown strategy '" + std::string(name) + "'");
}

std::string_view model_name(ModelFamily m) { return m == ModelFamily::FText ? "ftext" : "nbayes"; }

ModelFamily parse_model(std::string_view name) {
    if (name == "ftext") return ModelFamily::FText;
    if (name == "nbayes") return ModelFamily::NBayes;
    throw UsageError("unknown model family '" + std::string(name) + "'");
}

bool AcquisitionSpec::is_ensemble() const noexcept {
    return kind == Strategy::EnsembleEntropy || kind == Strategy::EnsembleLC;
}

bool AcquisitionSpec::uses_deletion() const noexcept { return kind == Strategy::DelEntropy || kind == Strategy::DelLC; }

bool AcquisitionSpec::uses_entropy() const noexcept {
    return kind == Strategy::Entropy || kind == Strategy::DelEntropy || kind == Strategy::EnsembleEntropy;
}

std::size_t LoopConfig::deletion_count() const noexcept {
    if (!acquisition.uses_deletion()) return 0;
    return acquisition.delete_count.value_or(query_size / 2);
}

void LoopConfig::validate(std::size_t n) const {
    if (query_size == 0) throw UsageError("query size K must be at least 1");
    if (rounds == 0) throw UsageError("number of rounds b must be at least 1");
    if (initial_size() == 0) throw UsageError("initial set must be non-empty");
    if (initial_size() + rounds * query_size > n) {
        throw UsageError("|S_0| + b*K = " + std::to_string(initial_size() + rounds * query_size) +
                         " exceeds the pool of " + std::to_string(n));
    }
    if (acquisition.is_ensemble() && acquisition.ensemble_size < 2) {
        throw UsageError("ensemble strategies need at least two members");
    }
    if (acquisition.uses_deletion() && deletion_count() >= initial_size()) {
        throw UsageError("deletion count must be smaller than the initial train set");
    }
    if (acquisition.kind == Strategy::CoresetKCenter && model != ModelFamily::FText) {
        throw UsageError("the coreset strategy works in ftext embedding space; use --model ftext");
    }
    if (model == ModelFamily::FText) ftext.validate();
}

void Partition::acquire(std::span<const DocId> ids) {
    std::vector<DocId> add(ids.begin(), ids.end());
    std::sort(add.begin(), add.end());
    std::vector<DocId> rest;
    std::set_difference(pool.begin(), pool.end(), add.begin(), add.end(), std::back_inserter(rest));
    if (rest.size() + add.size() != pool.size()) throw ComputeError("acquired id is not in the pool");
    std::vector<DocId> grown;
    std::merge(train.begin(), train.end(), add.begin(), add.end(), std::back_inserter(grown));
    pool = std::move(rest);
    train = std::move(grown);
}

void Partition::release(std::span<const DocId> ids) {
    std::vector<DocId> back(ids.begin(), ids.end());
    std::sort(back.begin(), back.end());
    std::vector<DocId> rest;
    std::set_difference(train.begin(), train.end(), back.begin(), back.end(), std::back_inserter(rest));
    if (rest.size() + back.size() != train.size()) throw ComputeError("released id is not in the train set");
    std::vector<DocId> grown;
    std::merge(pool.begin(), pool.end(), back.begin(), back.end(), std::back_inserter(grown));
    train = std::move(rest);
    pool = std::move(grown);
}

std::uint64_t model_seed(std::uint64_t run_seed, std::size_t round, std::size_t member) {
    return derive_seed(run_seed, kModelStreamBase + round) + member;
}

AlState initial_state(std::size_t corpus_size, const LoopConfig& config) {
    config.validate(corpus_size);
    AlState st;
    st.config = config;
    st.corpus_size = corpus_size;
    std::vector<DocId> ids(corpus_size);
    for (std::size_t i = 0; i < corpus_size; ++i) ids[i] = static_cast<DocId>(i);
    Rng rng(derive_seed(config.seed, kInitialStream));
    st.initial_ids = rng.sample(ids, config.initial_size());
    std::sort(st.initial_ids.begin(), st.initial_ids.end());
    st.partition.pool = std::move(ids);
    st.partition.acquire(st.initial_ids);
    st.train_sets.push_back(st.partition.train);
    return st;
}

std::vector<DocId> apply_deletion(AlState& state, std::span<const DocId> train_ids, std::span<const double> scores,
                                  std::size_t count) {
    if (count == 0) return {};
    if (count >= state.partition.train.size()) throw ComputeError("cannot delete the whole train set");
    std::vector<DocId> doomed = select_bottomk(train_ids, scores, count);
    state.partition.release(doomed);
    return doomed;
}

LoopResult run_loop(const LabeledCorpus& corpus, const LabeledCorpus* test, const LoopConfig& config) {
    if (test && test->num_classes() != corpus.num_classes()) {
        throw UsageError("test corpus has a different number of classes");
    }
    LoopResult result{initial_state(corpus.size(), config), {}};
    AlState& st = result.state;
    const AcquisitionSpec& acq = config.acquisition;
    const std::size_t members = acq.is_ensemble() ? acq.ensemble_size : 1;
    const bool random = acq.kind == Strategy::Random;
    Rng query_rng(derive_seed(config.seed, kRandomQueryStream));
    const std::vector<DocId> test_ids = test ? all_ids(*test) : std::vector<DocId>{};
    const double n = static_cast<double>(corpus.size());

    auto evaluate = [&](const std::vector<FittedModel>& committee) -> std::optional<double> {
        if (!test) return std::nullopt;
        const double acc = accuracy(committee_proba(committee, *test, test_ids), *test);
        const std::size_t size = st.partition.train.size();
        result.curve.push_back({size, static_cast<double>(size) / n, acc});
        return acc;
    };

    for (std::size_t round = 1; round <= config.rounds; ++round) {
        try {
            QueryRecord rec;
            rec.round = round;
            rec.train_size = st.partition.train.size();
            const std::vector<DocId> train = st.partition.train;
            const std::vector<DocId> pool = st.partition.pool;

            std::vector<FittedModel> committee;
            if (!random || test) committee = fit_members(corpus, train, config, round, members);
            rec.accuracy = evaluate(committee);

            if (random) {
                rec.selected = query_rng.sample(pool, config.query_size);
                rec.scores.assign(rec.selected.size(), 0.0);
            } else if (acq.kind == Strategy::CoresetKCenter) {
                const Matrix pool_emb = committee.front().embed(corpus, pool);
                const Matrix centers = committee.front().embed(corpus, train);
                for (const KCenterPick& pick : kcenter_greedy(pool_emb, pool, centers, config.query_size)) {
                    rec.selected.push_back(pick.id);
                    rec.scores.push_back(pick.distance);
                }
            } else {
                const std::vector<double> scores =
                    uncertainty(committee_proba(committee, corpus, pool), acq.uses_entropy());
                rec.selected = select_topk(pool, scores, config.query_size);
                for (DocId id : rec.selected) {
                    const auto at = std::lower_bound(pool.begin(), pool.end(), id) - pool.begin();
                    rec.scores.push_back(scores[static_cast<std::size_t>(at)]);
                }
            }

            if (acq.uses_deletion()) {
                const std::vector<double> train_scores =
                    uncertainty(committee_proba(committee, corpus, train), acq.uses_entropy());
                rec.deleted = apply_deletion(st, train, train_scores, config.deletion_count());
            }
            st.partition.acquire(rec.selected);
            st.train_sets.push_back(st.partition.train);
            st.queries.push_back(std::move(rec));
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            throw ComputeError("round " + std::to_string(round) + ": " + e.what());
        }
    }

    if (test) {
        try {
            const std::vector<FittedModel> committee =
                fit_members(corpus, st.partition.train, config, config.rounds + 1, members);
            const Matrix probs = committee_proba(committee, *test, test_ids);
            st.final_accuracy = accuracy(probs, *test);
            const std::size_t size = st.partition.train.size();
            result.curve.push_back({size, static_cast<double>(size) / n, *st.final_accuracy});
            st.final_calibration = diag::calibration(probs, labels_of(*test));
        } catch (const std::exception& e) {
            throw ComputeError("final model: " + std::string(e.what()));
        }
    }
    return result;
}

std::vector<DocId> acquired_set(const AlState& state) {
    std::vector<DocId> out;
    std::set_difference(state.partition.train.begin(), state.partition.train.end(), state.initial_ids.begin(),
                        state.initial_ids.end(), std::back_inserter(out));
    return out;
}

}  // namespace albias::al
