#include "albias/nbayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "albias/error.hpp"
#include "albias/ftext.hpp"
#include "albias/parallel.hpp"

namespace albias::nbayes {

namespace {

constexpr const char* kFormatTag = "albias-nbayes";
constexpr int kFormatVersion = 1;

const std::unordered_set<std::string_view>& stop_set() {
    static const std::unordered_set<std::string_view> set(english_stop_words().begin(), english_stop_words().end());
    return set;
}

std::vector<std::string> terms_of(std::string_view text, bool remove_stop_words) {
    std::vector<std::string> tokens = ftext::tokenize(text);
    if (remove_stop_words) {
        std::erase_if(tokens, [](const std::string& t) { return stop_set().contains(t); });
    }
    return tokens;
}

double logsumexp(std::span<const double> v) {
    const double peak = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(peak)) return peak;
    double s = 0.0;
    for (double x : v) s += std::exp(x - peak);
    return peak + std::log(s);
}

}  // namespace

long TfidfState::column(std::string_view term) const {
    auto it = column_of_.find(term);
    return it == column_of_.end() ? -1 : static_cast<long>(it->second);
}

SparseRow TfidfState::transform(std::string_view text) const {
    std::map<std::uint32_t, std::size_t> counts;
    for (const std::string& t : terms_of(text, options_.remove_stop_words)) {
        if (auto it = column_of_.find(t); it != column_of_.end()) ++counts[it->second];
    }
    SparseRow row;
    row.reserve(counts.size());
    double norm = 0.0;
    for (const auto& [col, count] : counts) {
        const double v = (1.0 + std::log(static_cast<double>(count))) * idf_[col];
        row.emplace_back(col, v);
        norm += v * v;
    }
    if (norm > 0.0) {
        const double inv = 1.0 / std::sqrt(norm);
        for (auto& entry : row) entry.second *= inv;
    }
    return row;
}

TfidfState fit_tfidf(std::span<const std::string_view> texts, const TfidfOptions& options) {
    if (texts.empty()) throw ComputeError("cannot fit TF-IDF on an empty subset");
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // term -> (total count, df)
    for (std::string_view text : texts) {
        std::unordered_map<std::string, std::size_t> local;
        for (std::string& t : terms_of(text, options.remove_stop_words)) ++local[std::move(t)];
        for (auto& [term, count] : local) {
            auto& s = stats[term];
            s.first += count;
            s.second += 1;
        }
    }
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(), stats.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second.first != b.second.first ? a.second.first > b.second.first : a.first < b.first;
    });
    if (ranked.size() > options.max_features) ranked.resize(options.max_features);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    TfidfState state;
    state.options_ = options;
    state.num_docs_ = texts.size();
    const double n = static_cast<double>(texts.size());
    for (std::size_t c = 0; c < ranked.size(); ++c) {
        state.terms_.push_back(ranked[c].first);
        state.column_of_.emplace(ranked[c].first, static_cast<std::uint32_t>(c));
        const std::size_t df = ranked[c].second.second;
        state.df_.push_back(df);
        state.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0);
    }
    return state;
}

TfidfState fit_tfidf(const LabeledCorpus& corpus, std::span<const DocId> ids, const TfidfOptions& options) {
    std::vector<std::string_view> texts;
    texts.reserve(ids.size());
    for (DocId id : ids) texts.push_back(corpus[id].text);
    return fit_tfidf(texts, options);
}

std::vector<double> MnbModel::joint_log_likelihood(const SparseRow& row) const {
    std::vector<double> jll = log_prior_;
    for (std::size_t c = 0; c < jll.size(); ++c) {
        if (!std::isfinite(jll[c])) continue;
        const auto lp = feature_log_prob_.row(c);
        for (const auto& [col, v] : row) jll[c] += v * lp[col];
    }
    return jll;
}

std::vector<double> MnbModel::predict_proba(const SparseRow& row) const {
    std::vector<double> p = joint_log_likelihood(row);
    const double z = logsumexp(p);
    for (double& v : p) v = std::exp(v - z);
    return p;
}

MnbModel fit_mnb(std::span<const SparseRow> features, std::span<const ClassId> labels, std::size_t num_classes,
                 std::size_t num_features, double alpha) {
    if (features.empty()) throw ComputeError("cannot fit naive Bayes on an empty subset");
    if (features.size() != labels.size()) throw ComputeError("feature and label counts differ");
    if (!(alpha > 0.0)) throw UsageError("smoothing alpha must be positive");

    Matrix counts(num_classes, num_features, 0.0);
    std::vector<std::size_t> class_docs(num_classes, 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const ClassId y = labels[i];
        if (y >= num_classes) throw ComputeError("label out of range in naive Bayes fit");
        ++class_docs[y];
        for (const auto& [col, v] : features[i]) {
            if (col >= num_features || v < 0.0) throw ComputeError("invalid feature in naive Bayes fit");
            counts(y, col) += v;
        }
    }

    MnbModel m;
    m.alpha_ = alpha;
    m.log_prior_.resize(num_classes);
    const double n = static_cast<double>(features.size());
    for (std::size_t c = 0; c < num_classes; ++c) {
        m.log_prior_[c] = class_docs[c] == 0 ? -std::numeric_limits<double>::infinity()
                                             : std::log(static_cast<double>(class_docs[c]) / n);
    }
    m.feature_log_prob_ = Matrix(num_classes, num_features);
    for (std::size_t c = 0; c < num_classes; ++c) {
        double total = 0.0;
        for (double v : counts.row(c)) total += v + alpha;
        const double log_total = std::log(total);
        auto out = m.feature_log_prob_.row(c);
        const auto in = counts.row(c);
        for (std::size_t j = 0; j < num_features; ++j) out[j] = std::log(in[j] + alpha) - log_total;
    }
    return m;
}

std::vector<double> NbClassifier::predict_proba(std::string_view text) const {
    return mnb_.predict_proba(tfidf_.transform(text));
}

Matrix NbClassifier::predict_proba(const LabeledCorpus& corpus, std::span<const DocId> ids) const {
    Matrix out(ids.size(), mnb_.num_classes());
    parallel_for(ids.size(), [&](std::size_t i) {
        const std::vector<double> p = predict_proba(corpus[ids[i]].text);
        std::copy(p.begin(), p.end(), out.row(i).begin());
    });
    return out;
}

NbClassifier train(const LabeledCorpus& corpus, std::span<const DocId> ids, const TfidfOptions& options) {
    TfidfState tfidf = fit_tfidf(corpus, ids, options);
    std::vector<SparseRow> rows;
    std::vector<ClassId> labels;
    rows.reserve(ids.size());
    labels.reserve(ids.size());
    for (DocId id : ids) {
        rows.push_back(tfidf.transform(corpus[id].text));
        labels.push_back(corpus[id].label);
    }
    MnbModel mnb = fit_mnb(rows, labels, corpus.num_classes(), tfidf.num_features());
    return NbClassifier(std::move(tfidf), std::move(mnb));
}

std::string NbClassifier::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = kFormatTag;
    j["version"] = kFormatVersion;
    j["stop_words"] = tfidf_.options_.remove_stop_words ? kStopWordsVersion : "none";
    j["max_features"] = tfidf_.options_.max_features;
    j["num_documents"] = tfidf_.num_docs_;
    j["terms"] = tfidf_.terms_;
    j["document_frequencies"] = tfidf_.df_;
    j["idf"] = tfidf_.idf_;
    j["alpha"] = mnb_.alpha_;
    // -inf priors are not representable in JSON; absent classes are stored as null.
    nlohmann::ordered_json priors = nlohmann::ordered_json::array();
    for (double p : mnb_.log_prior_) priors.push_back(std::isfinite(p) ? nlohmann::ordered_json(p) : nullptr);
    j["log_prior"] = std::move(priors);
    j["feature_log_prob"] = mnb_.feature_log_prob_.data;
    return j.dump();
}

NbClassifier NbClassifier::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model blob is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kFormatTag) throw DataError("not a naive Bayes model blob");
    if (j.value("version", 0) != kFormatVersion) throw DataError("unsupported naive Bayes model version");
    try {
        TfidfState t;
        const std::string stop = j.at("stop_words").get<std::string>();
        if (stop != "none" && stop != kStopWordsVersion) throw DataError("model uses unknown stop-word list " + stop);
        t.options_.remove_stop_words = stop != "none";
        t.options_.max_features = j.at("max_features").get<std::size_t>();
        t.num_docs_ = j.at("num_documents").get<std::size_t>();
        t.terms_ = j.at("terms").get<std::vector<std::string>>();
        t.df_ = j.at("document_frequencies").get<std::vector<std::size_t>>();
        t.idf_ = j.at("idf").get<std::vector<double>>();
        if (t.df_.size() != t.terms_.size() || t.idf_.size() != t.terms_.size()) {
            throw DataError("vectorizer arrays have inconsistent sizes");
        }
        for (std::size_t c = 0; c < t.terms_.size(); ++c) t.column_of_.emplace(t.terms_[c], static_cast<std::uint32_t>(c));

        MnbModel m;
        m.alpha_ = j.at("alpha").get<double>();
        for (const auto& p : j.at("log_prior")) {
            m.log_prior_.push_back(p.is_null() ? -std::numeric_limits<double>::infinity() : p.get<double>());
        }
        m.feature_log_prob_ = Matrix(m.log_prior_.size(), t.terms_.size());
        m.feature_log_prob_.data = j.at("feature_log_prob").get<std::vector<double>>();
        if (m.feature_log_prob_.data.size() != m.log_prior_.size() * t.terms_.size()) {
            throw DataError("likelihood table has the wrong size");
        }
        return NbClassifier(std::move(t), std::move(m));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed naive Bayes model blob: ") + e.what());
    }
}

void NbClassifier::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json();
}

NbClassifier NbClassifier::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

}  // namespace albias::nbayes
