// Python bindings: corpora, the active-learning loop, the two classifiers and the
// bias diagnostics. Errors surface as albias.UsageError / DataError / ComputeError.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "albias/acquisition.hpp"
#include "albias/alcore.hpp"
#include "albias/calibration.hpp"
#include "albias/corpus.hpp"
#include "albias/diagnostics.hpp"
#include "albias/error.hpp"
#include "albias/ftext.hpp"
#include "albias/nbayes.hpp"
#include "albias/runlog.hpp"
#include "albias/svmlin.hpp"

namespace py = pybind11;
using namespace albias;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw UsageError("expected a 2-d array");
    Matrix m(a.shape(0), a.shape(1));
    std::copy(a.data(), a.data() + a.size(), m.data.begin());
    return m;
}

Array to_array(const Matrix& m) {
    Array a({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), a.mutable_data());
    return a;
}

std::vector<DocId> all_ids(const LabeledCorpus& c) {
    std::vector<DocId> ids(c.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<DocId>(i);
    return ids;
}

std::vector<DocId> ids_or_all(const LabeledCorpus& c, const std::optional<std::vector<DocId>>& ids) {
    return ids ? *ids : all_ids(c);
}

LabeledCorpus make_corpus(const std::vector<std::pair<ClassId, std::string>>& docs, std::size_t num_classes) {
    std::vector<Document> out;
    out.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) out.push_back({static_cast<DocId>(i), docs[i].first, docs[i].second});
    return LabeledCorpus(std::move(out), num_classes);
}

py::dict calibration_dict(const diag::CalibrationReport& r) {
    py::dict d;
    d["count"] = r.count;
    d["nll"] = r.nll;
    d["brier"] = r.brier;
    d["ece"] = r.ece;
    d["variation_ratio"] = r.variation_ratio;
    d["mean_entropy"] = r.mean_entropy;
    d["mean_std"] = r.mean_std;
    return d;
}

}  // namespace

PYBIND11_MODULE(_albias, m) {
    m.doc() = "Active-learning bias toolkit (C++ core)";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<ComputeError>(m, "ComputeError", base.ptr());

    py::class_<LabeledCorpus>(m, "Corpus")
        .def(py::init(&make_corpus), py::arg("documents"), py::arg("num_classes"),
             "Documents as (label, text) pairs with 0-based labels; ids follow list order.")
        .def_static("load_csv", &load_csv, py::arg("path"), py::arg("num_classes"))
        .def_static(
            "synthetic",
            [](std::size_t num_classes, std::size_t docs_per_class, std::size_t class_vocab, std::size_t shared_vocab,
               double noise_rate, std::size_t min_len, std::size_t max_len, std::uint64_t seed) {
                SyntheticSpec s;
                s.num_classes = num_classes;
                s.docs_per_class = docs_per_class;
                s.class_vocab_size = class_vocab;
                s.shared_vocab_size = shared_vocab;
                s.noise_rate = noise_rate;
                s.doc_length_range = {min_len, max_len};
                s.seed = seed;
                return generate_synthetic(s);
            },
            py::arg("num_classes") = 4, py::arg("docs_per_class") = 100, py::arg("class_vocab") = 200,
            py::arg("shared_vocab") = 400, py::arg("noise_rate") = 0.05, py::arg("min_len") = 5,
            py::arg("max_len") = 30, py::arg("seed") = 0)
        .def("__len__", &LabeledCorpus::size)
        .def_property_readonly("num_classes", &LabeledCorpus::num_classes)
        .def("text", [](const LabeledCorpus& c, DocId id) { return c[id].text; })
        .def("label", [](const LabeledCorpus& c, DocId id) { return c[id].label; })
        .def("labels",
             [](const LabeledCorpus& c) {
                 std::vector<ClassId> out;
                 for (const Document& d : c.documents()) out.push_back(d.label);
                 return out;
             })
        .def("label_histogram", &LabeledCorpus::label_histogram)
        .def("write_csv", [](const LabeledCorpus& c, const std::filesystem::path& p) { write_csv(c, p); })
        .def("__eq__", [](const LabeledCorpus& a, const LabeledCorpus& b) { return a == b; });

    py::class_<al::RunLog>(m, "RunLog")
        .def_property_readonly("acquired", [](const al::RunLog& l) { return al::acquired_set(l.result.state); })
        .def_property_readonly("initial", [](const al::RunLog& l) { return l.result.state.initial_ids; })
        .def_property_readonly("train_sets", [](const al::RunLog& l) { return l.result.state.train_sets; })
        .def_property_readonly("queries",
                               [](const al::RunLog& l) {
                                   std::vector<std::vector<DocId>> out;
                                   for (const auto& q : l.result.state.queries) out.push_back(q.selected);
                                   return out;
                               })
        .def_property_readonly("scores",
                               [](const al::RunLog& l) {
                                   std::vector<std::vector<double>> out;
                                   for (const auto& q : l.result.state.queries) out.push_back(q.scores);
                                   return out;
                               })
        .def_property_readonly("curve",
                               [](const al::RunLog& l) {
                                   std::vector<std::tuple<std::size_t, double, double>> out;
                                   for (const auto& p : l.result.curve) out.emplace_back(p.train_size, p.fraction, p.accuracy);
                                   return out;
                               })
        .def_property_readonly("final_accuracy", [](const al::RunLog& l) { return l.result.state.final_accuracy; })
        .def_property_readonly("label", &diag::run_label)
        .def("to_jsonl", &al::to_jsonl)
        .def("write", [](const al::RunLog& l, const std::filesystem::path& p) { al::write_run_log(l, p); })
        .def_static("read", &al::read_run_log)
        .def_static("parse", [](const std::string& text) { return al::parse_jsonl(text); });

    m.def(
        "run",
        [](const LabeledCorpus& corpus, const LabeledCorpus* test, const std::string& strategy, const std::string& model,
           std::size_t k, std::size_t rounds, std::optional<std::size_t> init_size, std::uint64_t seed,
           std::size_t ensemble_size, std::optional<std::size_t> delete_count, std::size_t dim, std::size_t epochs,
           double lr, const std::string& source) {
            al::LoopConfig c;
            c.query_size = k;
            c.rounds = rounds;
            c.init_size = init_size;
            c.seed = seed;
            c.model = al::parse_model(model);
            c.acquisition.kind = al::parse_strategy(strategy);
            c.acquisition.ensemble_size = ensemble_size;
            c.acquisition.delete_count = delete_count;
            c.ftext.dim = dim;
            c.ftext.epochs = epochs;
            c.ftext.initial_lr = lr;
            c.ftext.validate();
            al::RunLog log;
            log.source = source;
            log.num_classes = corpus.num_classes();
            if (test) log.test_size = test->size();
            py::gil_scoped_release release;
            log.result = al::run_loop(corpus, test, c);
            return log;
        },
        py::arg("corpus"), py::arg("test") = nullptr, py::arg("strategy") = "entropy", py::arg("model") = "ftext",
        py::arg("k"), py::arg("rounds"), py::arg("init_size") = py::none(), py::arg("seed") = 0,
        py::arg("ensemble_size") = 5, py::arg("delete_count") = py::none(), py::arg("dim") = 25,
        py::arg("epochs") = 10, py::arg("lr") = 0.25, py::arg("source") = "python",
        "Runs one pool-based active-learning loop.");

    py::class_<ftext::FtModel>(m, "FastText")
        .def_static(
            "train",
            [](const LabeledCorpus& corpus, std::optional<std::vector<DocId>> ids, std::size_t dim, std::size_t epochs,
               double lr, std::uint64_t seed) {
                ftext::FtTrainConfig c;
                c.dim = dim;
                c.epochs = epochs;
                c.initial_lr = lr;
                c.seed = seed;
                const auto use = ids_or_all(corpus, ids);
                py::gil_scoped_release release;
                return ftext::train(corpus, use, c);
            },
            py::arg("corpus"), py::arg("ids") = py::none(), py::arg("dim") = 25, py::arg("epochs") = 10,
            py::arg("lr") = 0.25, py::arg("seed") = 0)
        .def("predict_proba", py::overload_cast<std::string_view>(&ftext::FtModel::predict_proba, py::const_))
        .def("sentence_embedding", &ftext::FtModel::sentence_embedding)
        .def("predict_proba_corpus",
             [](const ftext::FtModel& f, const LabeledCorpus& c, std::optional<std::vector<DocId>> ids) {
                 return to_array(f.predict_proba(c, ids_or_all(c, ids)));
             },
             py::arg("corpus"), py::arg("ids") = py::none())
        .def("embed_corpus",
             [](const ftext::FtModel& f, const LabeledCorpus& c, std::optional<std::vector<DocId>> ids) {
                 return to_array(f.sentence_embeddings(c, ids_or_all(c, ids)));
             },
             py::arg("corpus"), py::arg("ids") = py::none())
        .def("save", &ftext::FtModel::save)
        .def_static("load", &ftext::FtModel::load);

    py::class_<nbayes::NbClassifier>(m, "NaiveBayes")
        .def_static(
            "train",
            [](const LabeledCorpus& corpus, std::optional<std::vector<DocId>> ids, std::size_t max_features,
               bool remove_stop_words) {
                nbayes::TfidfOptions o;
                o.max_features = max_features;
                o.remove_stop_words = remove_stop_words;
                return nbayes::train(corpus, ids_or_all(corpus, ids), o);
            },
            py::arg("corpus"), py::arg("ids") = py::none(), py::arg("max_features") = 50000,
            py::arg("remove_stop_words") = true)
        .def("predict_proba", py::overload_cast<std::string_view>(&nbayes::NbClassifier::predict_proba, py::const_))
        .def("predict_proba_corpus",
             [](const nbayes::NbClassifier& n, const LabeledCorpus& c, std::optional<std::vector<DocId>> ids) {
                 return to_array(n.predict_proba(c, ids_or_all(c, ids)));
             },
             py::arg("corpus"), py::arg("ids") = py::none())
        .def("save", &nbayes::NbClassifier::save)
        .def_static("load", &nbayes::NbClassifier::load);

    m.def(
        "svm_support_ids",
        [](const Array& embeddings, const std::vector<ClassId>& labels, double C, std::uint64_t seed) {
            svmlin::SvmConfig c;
            c.C = C;
            c.seed = seed;
            const Matrix x = to_matrix(embeddings);
            std::vector<DocId> ids(x.rows);
            for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<DocId>(i);
            return svmlin::support_ids(svmlin::train_svm(x, labels, c), ids);
        },
        py::arg("embeddings"), py::arg("labels"), py::arg("C") = 1.0, py::arg("seed") = 0,
        "Row indices that are support vectors of the one-vs-one linear SVM.");

    m.def("fnv1a64", [](py::bytes b) { return ftext::fnv1a64(std::string(b)); });
    m.def("tokenize", &ftext::tokenize);
    m.def("score_entropy", [](const std::vector<double>& p) { return al::score_entropy(p); });
    m.def("score_lc", [](const std::vector<double>& p) { return al::score_lc(p); });
    m.def(
        "select_topk",
        [](const std::vector<DocId>& ids, const std::vector<double>& scores, std::size_t k) {
            return al::select_topk(ids, scores, k);
        },
        py::arg("ids"), py::arg("scores"), py::arg("k"));
    m.def("label_entropy", [](const std::vector<std::size_t>& counts) { return diag::label_entropy(counts); });
    m.def("overlap_pct", [](const std::vector<DocId>& a, const std::vector<DocId>& b) { return diag::overlap_pct(a, b); });
    m.def("chance_overlap", &diag::chance_overlap, py::arg("n_pool"), py::arg("size_a"), py::arg("size_b"));
    m.def(
        "calibration",
        [](const Array& probs, const std::vector<ClassId>& labels) {
            return calibration_dict(diag::calibration(to_matrix(probs), labels));
        },
        py::arg("probs"), py::arg("labels"));
    m.def(
        "class_bias",
        [](const al::RunLog& log, const LabeledCorpus& corpus) {
            const diag::MeanStd q = diag::per_query_label_entropy(log.result.state, corpus);
            return py::make_tuple(q.mean, q.std, diag::final_sample_label_entropy(log.result.state, corpus));
        },
        py::arg("log"), py::arg("corpus"), "(per-query mean, per-query std, final-sample entropy)");
}
