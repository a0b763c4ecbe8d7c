#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "albias/corpus.hpp"
#include "albias/matrix.hpp"

// Bag-of-ngrams linear text classifier: averaged unigram and hashed-bigram
// embeddings feeding a softmax layer, trained with per-sample SGD.
namespace albias::ftext {

using FeatureId = std::uint64_t;

/// Lowercases ASCII and splits on whitespace and ASCII punctuation. Bytes >= 0x80
/// are kept inside tokens, so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

struct FeatureHasher {
    static constexpr char kSeparator = '\x1f';
    std::uint64_t bucket_count = std::uint64_t{1} << 21;

    /// fnv1a64(a + '\x1f' + b) mod bucket_count.
    std::uint64_t bucket(std::string_view a, std::string_view b) const;
};

/// Token -> dense id, assigned in order of first appearance.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> tokens);

    /// Adds the token if unseen; returns its id.
    std::uint32_t add(const std::string& token);
    const std::uint32_t* find(std::string_view token) const;
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

/// Unigram ids for in-vocabulary tokens (OOV dropped), then one bucket id per
/// adjacent token pair, offset by the vocabulary size.
std::vector<FeatureId> featurize(std::span<const std::string> tokens, const FeatureHasher& hasher,
                                 const Vocabulary& vocab);

struct FtTrainConfig {
    std::size_t dim = 25;
    std::size_t epochs = 10;
    double initial_lr = 0.25;
    std::uint64_t seed = 0;
    std::uint64_t bucket_count = std::uint64_t{1} << 21;

    void validate() const;
};

/// Learning rate for update u of `total` (0-based): initial_lr * (1 - u / total).
double scheduled_lr(double initial_lr, std::size_t update, std::size_t total);

/// Initial value of an embedding row: uniform in [-1/(2d), 1/(2d)], generated from
/// (seed, feature) alone so rows never touched by training need no storage.
void initial_row(std::uint64_t seed, FeatureId feature, std::span<double> out);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> probs;        // softmax output, length C
    std::vector<double> grad_hidden;  // d loss / d hidden, length d
    Matrix grad_output;               // d loss / d W, C x d
};

/// Softmax cross-entropy of `label` given hidden vector h and output matrix W (C x d).
LossGradient softmax_xent(const Matrix& output, std::span<const double> hidden, std::size_t label);

/// Mean of the given rows of `embedding`; zero vector when `ids` is empty.
std::vector<double> mean_rows(const Matrix& embedding, std::span<const std::size_t> ids);

class FtModel {
public:
    const FtTrainConfig& config() const noexcept { return config_; }
    std::size_t num_classes() const noexcept { return output_.rows; }
    std::size_t dim() const noexcept { return config_.dim; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const Matrix& output_matrix() const noexcept { return output_; }
    /// Row of E for a feature id (materialized or initial).
    std::vector<double> embedding_row(FeatureId feature) const;
    std::size_t stored_rows() const noexcept { return row_of_.size(); }

    std::vector<FeatureId> features(std::string_view text) const;
    std::vector<double> sentence_embedding(std::string_view text) const;
    std::vector<double> predict_proba(std::string_view text) const;

    /// Rows in `ids` order, computed in parallel.
    Matrix predict_proba(const LabeledCorpus& corpus, std::span<const DocId> ids) const;
    Matrix sentence_embeddings(const LabeledCorpus& corpus, std::span<const DocId> ids) const;

    /// JSON blob: format tag, version, config, vocabulary, output matrix and the
    /// materialized embedding rows. Unlisted rows are regenerated from the seed.
    std::string to_json() const;
    static FtModel from_json(std::string_view json);
    void save(const std::filesystem::path& path) const;
    static FtModel load(const std::filesystem::path& path);

    friend bool operator==(const FtModel& a, const FtModel& b);

private:
    friend FtModel train(const LabeledCorpus&, std::span<const DocId>, const FtTrainConfig&);

    std::vector<double> hidden(std::span<const FeatureId> features) const;

    FtTrainConfig config_;
    FeatureHasher hasher_;
    Vocabulary vocab_;
    std::unordered_map<FeatureId, std::size_t> row_of_;
    std::vector<FeatureId> stored_features_;  // compact row -> feature id
    Matrix rows_;                              // materialized rows of E
    Matrix output_;                            // W, C x d
};

/// Sequential, seeded SGD over the subset `ids` of `corpus`.
FtModel train(const LabeledCorpus& corpus, std::span<const DocId> ids, const FtTrainConfig& config);

}  // namespace albias::ftext
