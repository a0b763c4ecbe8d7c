#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "albias/corpus.hpp"
#include "albias/matrix.hpp"

// Multinomial Naive Bayes over sublinear, L2-normalized TF-IDF features.
namespace albias::nbayes {

extern const char* const kStopWordsVersion;
std::span<const std::string_view> english_stop_words();

/// Sparse feature row: (column, value) pairs sorted by column.
using SparseRow = std::vector<std::pair<std::uint32_t, double>>;

struct TfidfOptions {
    std::size_t max_features = 50000;
    bool remove_stop_words = true;
};

/// Fitted TF-IDF vectorizer.
///   tf  = 1 + ln(count)             for count > 0
///   idf = ln((1 + N) / (1 + df)) + 1
/// Rows are L2-normalized. The vocabulary keeps the max_features terms with the
/// highest total count (ties by term, lexicographically); columns follow term order.
class TfidfState {
public:
    std::size_t num_features() const noexcept { return terms_.size(); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<std::size_t>& document_frequencies() const noexcept { return df_; }
    const std::vector<double>& idf() const noexcept { return idf_; }
    std::size_t num_documents() const noexcept { return num_docs_; }
    const TfidfOptions& options() const noexcept { return options_; }
    /// Column of a term, or -1.
    long column(std::string_view term) const;

    SparseRow transform(std::string_view text) const;

private:
    friend TfidfState fit_tfidf(std::span<const std::string_view>, const TfidfOptions&);
    friend class NbClassifier;

    TfidfOptions options_;
    std::size_t num_docs_ = 0;
    std::vector<std::string> terms_;
    std::map<std::string, std::uint32_t, std::less<>> column_of_;
    std::vector<std::size_t> df_;
    std::vector<double> idf_;
};

TfidfState fit_tfidf(std::span<const std::string_view> texts, const TfidfOptions& options = {});
TfidfState fit_tfidf(const LabeledCorpus& corpus, std::span<const DocId> ids, const TfidfOptions& options = {});

/// Class log-priors from label frequencies (classes absent from training get -inf)
/// and per-class feature log-likelihoods with additive smoothing.
class MnbModel {
public:
    const std::vector<double>& log_prior() const noexcept { return log_prior_; }
    const Matrix& feature_log_prob() const noexcept { return feature_log_prob_; }
    std::size_t num_classes() const noexcept { return log_prior_.size(); }
    double alpha() const noexcept { return alpha_; }

    std::vector<double> joint_log_likelihood(const SparseRow& row) const;
    std::vector<double> predict_proba(const SparseRow& row) const;

private:
    friend MnbModel fit_mnb(std::span<const SparseRow>, std::span<const ClassId>, std::size_t, std::size_t, double);
    friend class NbClassifier;

    double alpha_ = 1.0;
    std::vector<double> log_prior_;
    Matrix feature_log_prob_;
};

MnbModel fit_mnb(std::span<const SparseRow> features, std::span<const ClassId> labels, std::size_t num_classes,
                 std::size_t num_features, double alpha = 1.0);

/// Vectorizer plus classifier, fitted together on one labeled subset.
class NbClassifier {
public:
    NbClassifier(TfidfState tfidf, MnbModel mnb) : tfidf_(std::move(tfidf)), mnb_(std::move(mnb)) {}

    const TfidfState& tfidf() const noexcept { return tfidf_; }
    const MnbModel& mnb() const noexcept { return mnb_; }

    std::vector<double> predict_proba(std::string_view text) const;
    Matrix predict_proba(const LabeledCorpus& corpus, std::span<const DocId> ids) const;

    std::string to_json() const;
    static NbClassifier from_json(std::string_view json);
    void save(const std::filesystem::path& path) const;
    static NbClassifier load(const std::filesystem::path& path);

private:
    TfidfState tfidf_;
    MnbModel mnb_;
};

NbClassifier train(const LabeledCorpus& corpus, std::span<const DocId> ids, const TfidfOptions& options = {});

}  // namespace albias::nbayes
