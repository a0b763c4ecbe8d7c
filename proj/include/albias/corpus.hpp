#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace albias {

using DocId = std::uint32_t;
using ClassId = std::uint32_t;

struct Document {
    DocId id = 0;
    ClassId label = 0;
    std::string text;

    friend bool operator==(const Document&, const Document&) = default;
};

/// An id-stable labeled corpus: documents[i].id == i for every i.
class LabeledCorpus {
public:
    LabeledCorpus() = default;
    /// Validates the invariants (dense ids, labels < C, non-empty text, C >= 2).
    LabeledCorpus(std::vector<Document> documents, std::size_t num_classes,
                  std::vector<std::string> class_names = {});

    std::size_t size() const noexcept { return documents_.size(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    const std::vector<Document>& documents() const noexcept { return documents_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    /// Throws DataError for an id outside the corpus.
    const Document& operator[](DocId id) const;

    std::vector<std::size_t> label_histogram() const;

    friend bool operator==(const LabeledCorpus&, const LabeledCorpus&) = default;

private:
    std::vector<Document> documents_;
    std::size_t num_classes_ = 0;
    std::vector<std::string> class_names_;
};

/// One CSV record split into its fields (RFC 4180).
using CsvRecord = std::vector<std::string>;

/// Parses RFC 4180 text. Throws MalformedRow for an unterminated quote or stray
/// characters after a closing quote.
std::vector<CsvRecord> parse_csv(std::string_view text);

/// Quotes every field, doubling embedded quotes; records end with "\n".
std::string format_csv_record(std::span<const std::string> fields);

/// Loads `"label","field1",...` rows with a 1-based label; text is the remaining
/// fields joined by a single space.
LabeledCorpus load_csv(const std::filesystem::path& path, std::size_t num_classes);
LabeledCorpus parse_labeled_csv(std::string_view text, std::size_t num_classes);

void write_csv(const LabeledCorpus& corpus, const std::filesystem::path& path);

struct SyntheticSpec {
    std::size_t num_classes = 4;
    std::size_t docs_per_class = 100;
    std::size_t class_vocab_size = 200;
    std::size_t shared_vocab_size = 400;
    double noise_rate = 0.05;
    std::pair<std::size_t, std::size_t> doc_length_range{5, 30};
    std::uint64_t seed = 0;

    void validate() const;
};

/// Each class draws its tokens from a private Zipf-distributed vocabulary; a
/// per-document share of tokens comes from a common vocabulary instead. That
/// share is u^((1 - r) / r) for u uniform on [0, 1) and r = noise_rate, which has
/// mean r and a heavy tail: most documents are clean, a few sit near the class
/// boundary. Classes are exactly balanced and document order is shuffled.
LabeledCorpus generate_synthetic(const SyntheticSpec& spec);

struct SurrogateEntry {
    DocId id = 0;
    std::size_t round = 0;           // 0 for the random initial set
    std::optional<double> score;     // acquisition score at selection, none for round 0
};

struct SurrogateManifest {
    std::string source;
    std::string strategy;
    std::uint64_t seed = 0;
    std::size_t rounds = 0;
    std::vector<SurrogateEntry> per_id;
    double compression_ratio = 0.0;
};

/// Builds a manifest over `per_id` with compression ratio |per_id| / corpus size.
SurrogateManifest make_manifest(std::string source, std::string strategy, std::uint64_t seed,
                                std::size_t rounds, std::vector<SurrogateEntry> per_id,
                                std::size_t corpus_size);

std::string manifest_to_json(const SurrogateManifest& manifest);

/// Writes out_dir/surrogate.csv (load_csv format, ordered by round then id) and
/// out_dir/manifest.json. The manifest provenance must cover exactly acquired_ids.
void export_surrogate(const LabeledCorpus& corpus, std::span<const DocId> acquired_ids,
                      const SurrogateManifest& manifest, const std::filesystem::path& out_dir);

/// A corpus directory in the layout of the public text-classification corpora:
/// train.csv, optional test.csv, optional classes.txt (one name per line).
struct CorpusBundle {
    LabeledCorpus train;
    std::optional<LabeledCorpus> test;
};

CorpusBundle load_corpus_dir(const std::filesystem::path& dir, std::optional<std::size_t> num_classes);
void write_corpus_dir(const CorpusBundle& bundle, const std::filesystem::path& dir);

}  // namespace albias
