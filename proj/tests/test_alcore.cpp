#include <doctest.h>

#include <algorithm>
#include <set>

#include "albias/alcore.hpp"
#include "albias/error.hpp"
#include "albias/random.hpp"
#include "test_util.hpp"

using namespace albias;
using namespace albias::al;

namespace {

LabeledCorpus synth(std::size_t classes, std::size_t per_class, std::uint64_t seed, double noise = 0.1) {
    SyntheticSpec s;
    s.num_classes = classes;
    s.docs_per_class = per_class;
    s.noise_rate = noise;
    s.seed = seed;
    return generate_synthetic(s);
}

LoopConfig config(Strategy kind, ModelFamily model, std::size_t k, std::size_t b, std::uint64_t seed) {
    LoopConfig c;
    c.query_size = k;
    c.rounds = b;
    c.seed = seed;
    c.model = model;
    c.acquisition.kind = kind;
    c.ftext.epochs = 5;
    return c;
}

bool disjoint(const std::vector<DocId>& a, const std::vector<DocId>& b) {
    std::vector<DocId> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return common.empty();
}

}  // namespace

TEST_CASE("strategy and model names round trip") {
    for (Strategy s : {Strategy::Random, Strategy::Entropy, Strategy::LeastConfidence, Strategy::DelEntropy,
                       Strategy::DelLC, Strategy::EnsembleEntropy, Strategy::EnsembleLC, Strategy::CoresetKCenter}) {
        CHECK(parse_strategy(strategy_name(s)) == s);
    }
    CHECK(parse_model("nbayes") == ModelFamily::NBayes);
    CHECK_THROWS_AS(parse_strategy("bald"), UsageError);
    CHECK_THROWS_AS(parse_model("bert"), UsageError);
}

TEST_CASE("LoopConfig validation") {
    LoopConfig c = config(Strategy::Entropy, ModelFamily::FText, 10, 3, 0);
    CHECK_NOTHROW(c.validate(40));
    CHECK_THROWS_AS(c.validate(39), UsageError);
    c.query_size = 0;
    CHECK_THROWS_AS(c.validate(1000), UsageError);
    c = config(Strategy::EnsembleEntropy, ModelFamily::FText, 10, 3, 0);
    c.acquisition.ensemble_size = 1;
    CHECK_THROWS_AS(c.validate(1000), UsageError);
    c = config(Strategy::DelEntropy, ModelFamily::FText, 10, 3, 0);
    CHECK(c.deletion_count() == 5);
    c.acquisition.delete_count = 10;
    CHECK_THROWS_AS(c.validate(1000), UsageError);
    c = config(Strategy::CoresetKCenter, ModelFamily::NBayes, 10, 3, 0);
    CHECK_THROWS_AS(c.validate(1000), UsageError);
}

TEST_CASE("run_loop without deletion: nesting, sizes and disjointness") {
    const LabeledCorpus corpus = synth(3, 60, 1);
    for (Strategy s : {Strategy::Random, Strategy::Entropy, Strategy::LeastConfidence, Strategy::EnsembleLC,
                       Strategy::CoresetKCenter}) {
        CAPTURE(strategy_name(s));
        LoopConfig cfg = config(s, ModelFamily::FText, 8, 4, 3);
        cfg.acquisition.ensemble_size = 2;
        const AlState st = run_loop(corpus, nullptr, cfg).state;
        REQUIRE(st.train_sets.size() == 5);
        for (std::size_t i = 0; i < st.train_sets.size(); ++i) {
            CHECK(st.train_sets[i].size() == 8 + i * 8);
            if (i > 0) CHECK(std::includes(st.train_sets[i].begin(), st.train_sets[i].end(),
                                           st.train_sets[i - 1].begin(), st.train_sets[i - 1].end()));
        }
        CHECK(disjoint(st.partition.train, st.partition.pool));
        CHECK(st.partition.train.size() + st.partition.pool.size() == corpus.size());
        CHECK(acquired_set(st).size() == 4 * 8);
        for (const QueryRecord& q : st.queries) {
            CHECK(q.selected.size() == 8);
            CHECK(q.scores.size() == 8);
            CHECK(disjoint(std::vector<DocId>(q.selected.begin(), q.selected.end()), st.train_sets[q.round - 1]) ==
                  true);
        }
    }
}

TEST_CASE("every selected id was in the pool at selection time") {
    const LabeledCorpus corpus = synth(3, 50, 2);
    const AlState st = run_loop(corpus, nullptr, config(Strategy::DelEntropy, ModelFamily::NBayes, 6, 5, 1)).state;
    std::set<DocId> train(st.initial_ids.begin(), st.initial_ids.end());
    for (const QueryRecord& q : st.queries) {
        for (DocId id : q.selected) CHECK_FALSE(train.contains(id));
        for (DocId id : q.deleted) {
            CHECK(train.contains(id));
            train.erase(id);
        }
        train.insert(q.selected.begin(), q.selected.end());
        CHECK(std::vector<DocId>(train.begin(), train.end()) == st.train_sets[q.round]);
        CHECK(q.deleted.size() == 3);
    }
    CHECK(disjoint(st.partition.train, st.partition.pool));
}

TEST_CASE("acquired_set under deletion equals the replayed final train set minus S_0") {
    const LabeledCorpus corpus = synth(4, 40, 5);
    LoopConfig cfg = config(Strategy::DelLC, ModelFamily::FText, 10, 6, 9);
    cfg.acquisition.delete_count = 4;
    const AlState st = run_loop(corpus, nullptr, cfg).state;
    std::set<DocId> replay(st.initial_ids.begin(), st.initial_ids.end());
    for (const QueryRecord& q : st.queries) {
        for (DocId id : q.deleted) replay.erase(id);
        replay.insert(q.selected.begin(), q.selected.end());
    }
    for (DocId id : st.initial_ids) replay.erase(id);
    CHECK(acquired_set(st) == std::vector<DocId>(replay.begin(), replay.end()));
    CHECK(st.partition.train.size() == 10 + 6 * (10 - 4));
}

TEST_CASE("run_loop is deterministic") {
    const LabeledCorpus corpus = synth(3, 40, 4);
    const LabeledCorpus test = synth(3, 10, 44);
    for (Strategy s : {Strategy::Random, Strategy::Entropy, Strategy::EnsembleEntropy}) {
        LoopConfig cfg = config(s, ModelFamily::FText, 6, 3, 12);
        cfg.acquisition.ensemble_size = 3;
        const LoopResult a = run_loop(corpus, &test, cfg), b = run_loop(corpus, &test, cfg);
        CHECK(a.state.queries == b.state.queries);
        CHECK(a.state.train_sets == b.state.train_sets);
        CHECK(a.curve == b.curve);
        CHECK(a.state.final_accuracy == b.state.final_accuracy);
    }
}

TEST_CASE("Random strategy matches a seeded reference sampler") {
    const LabeledCorpus corpus = synth(2, 50, 6);
    const LoopConfig cfg = config(Strategy::Random, ModelFamily::FText, 7, 5, 77);
    const AlState st = run_loop(corpus, nullptr, cfg).state;

    std::vector<DocId> all(corpus.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<DocId>(i);
    Rng init(derive_seed(77, 0));
    std::vector<DocId> s0 = init.sample(all, 7);
    std::sort(s0.begin(), s0.end());
    CHECK(st.initial_ids == s0);

    Rng draws(derive_seed(77, 1));
    std::set<DocId> train(s0.begin(), s0.end());
    for (const QueryRecord& q : st.queries) {
        std::vector<DocId> pool;
        for (DocId id : all)
            if (!train.contains(id)) pool.push_back(id);
        const std::vector<DocId> want = draws.sample(pool, 7);
        CHECK(q.selected == want);
        train.insert(want.begin(), want.end());
    }
}

TEST_CASE("on a binary corpus Entropy and LC select identical queries") {
    const LabeledCorpus corpus = synth(2, 80, 8, 0.2);
    for (ModelFamily m : {ModelFamily::FText, ModelFamily::NBayes}) {
        const AlState ent = run_loop(corpus, nullptr, config(Strategy::Entropy, m, 10, 5, 2)).state;
        const AlState lc = run_loop(corpus, nullptr, config(Strategy::LeastConfidence, m, 10, 5, 2)).state;
        REQUIRE(ent.queries.size() == lc.queries.size());
        for (std::size_t r = 0; r < ent.queries.size(); ++r) {
            std::vector<DocId> a = ent.queries[r].selected, b = lc.queries[r].selected;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
    }
}

TEST_CASE("an ensemble of identical models selects what the single model selects") {
    // naive Bayes fits are seed-free, so every member is the same model
    const LabeledCorpus corpus = synth(3, 60, 10, 0.2);
    const AlState single = run_loop(corpus, nullptr, config(Strategy::Entropy, ModelFamily::NBayes, 9, 4, 5)).state;
    LoopConfig ens = config(Strategy::EnsembleEntropy, ModelFamily::NBayes, 9, 4, 5);
    ens.acquisition.ensemble_size = 4;
    const AlState committee = run_loop(corpus, nullptr, ens).state;
    for (std::size_t r = 0; r < single.queries.size(); ++r) {
        CHECK(single.queries[r].selected == committee.queries[r].selected);
    }
}

TEST_CASE("apply_deletion") {
    LoopConfig cfg = config(Strategy::DelEntropy, ModelFamily::FText, 5, 1, 3);
    AlState st = initial_state(50, cfg);
    const std::vector<DocId> train = st.partition.train;
    const AlState before = st;

    SUBCASE("zero deletions leave the state unchanged") {
        const std::vector<double> scores(train.size(), 0.5);
        CHECK(apply_deletion(st, train, scores, 0).empty());
        CHECK(st.partition == before.partition);
    }
    SUBCASE("equal scores remove the lowest ids") {
        const std::vector<double> scores(train.size(), 0.5);
        const auto gone = apply_deletion(st, train, scores, 2);
        CHECK(gone == std::vector<DocId>{train[0], train[1]});
        CHECK(st.partition.train.size() == train.size() - 2);
        CHECK(disjoint(st.partition.train, st.partition.pool));
        CHECK(std::binary_search(st.partition.pool.begin(), st.partition.pool.end(), train[0]));
    }
    SUBCASE("least uncertain go first") {
        std::vector<double> scores(train.size(), 0.5);
        scores[3] = 0.1;
        CHECK(apply_deletion(st, train, scores, 1) == std::vector<DocId>{train[3]});
    }
    SUBCASE("cannot delete everything") {
        const std::vector<double> scores(train.size(), 0.5);
        CHECK_THROWS_AS(apply_deletion(st, train, scores, train.size()), ComputeError);
    }
}

TEST_CASE("accuracy curve and final calibration with a test corpus") {
    const LabeledCorpus corpus = synth(4, 50, 12, 0.05);
    const LabeledCorpus test = synth(4, 20, 13, 0.05);
    const LoopResult r = run_loop(corpus, &test, config(Strategy::Entropy, ModelFamily::FText, 10, 4, 1));
    REQUIRE(r.curve.size() == 5);
    for (std::size_t i = 0; i < r.curve.size(); ++i) {
        CHECK(r.curve[i].train_size == 10 + 10 * i);
        CHECK(r.curve[i].fraction == doctest::Approx((10.0 + 10 * i) / 200));
    }
    REQUIRE(r.state.final_accuracy);
    CHECK(*r.state.final_accuracy > 0.8);
    REQUIRE(r.state.final_calibration);
    CHECK(r.state.final_calibration->count == test.size());
    for (const QueryRecord& q : r.state.queries) CHECK(q.accuracy.has_value());
}

TEST_CASE("test corpus with the wrong class count is rejected") {
    const LabeledCorpus corpus = synth(3, 20, 1), test = synth(2, 5, 2);
    CHECK_THROWS_AS(run_loop(corpus, &test, config(Strategy::Entropy, ModelFamily::NBayes, 5, 1, 0)), UsageError);
}
