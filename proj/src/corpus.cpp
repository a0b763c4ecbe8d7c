#include "albias/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "albias/error.hpp"
#include "albias/random.hpp"

namespace albias {

namespace {

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

LabeledCorpus::LabeledCorpus(std::vector<Document> documents, std::size_t num_classes,
                             std::vector<std::string> class_names)
    : documents_(std::move(documents)), num_classes_(num_classes), class_names_(std::move(class_names)) {
    if (num_classes_ < 2) throw DataError("a corpus needs at least two classes");
    if (documents_.empty()) throw DataError("a corpus needs at least one document");
    if (class_names_.empty()) {
        for (std::size_t c = 0; c < num_classes_; ++c) class_names_.push_back("class_" + std::to_string(c + 1));
    }
    if (class_names_.size() != num_classes_) throw DataError("class name count does not match num_classes");
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const Document& d = documents_[i];
        if (d.id != i) throw DataError("document ids must be dense row indices; id " + std::to_string(d.id) +
                                       " at position " + std::to_string(i));
        if (d.label >= num_classes_) throw DataError("label out of range for document " + std::to_string(i));
        if (is_blank(d.text)) throw DataError("empty text for document " + std::to_string(i));
    }
}

const Document& LabeledCorpus::operator[](DocId id) const {
    if (id >= documents_.size()) throw DataError("document id " + std::to_string(id) + " is outside the corpus");
    return documents_[id];
}

std::vector<std::size_t> LabeledCorpus::label_histogram() const {
    std::vector<std::size_t> counts(num_classes_, 0);
    for (const Document& d : documents_) ++counts[d.label];
    return counts;
}

std::vector<CsvRecord> parse_csv(std::string_view text) {
    std::vector<CsvRecord> records;
    CsvRecord record;
    std::string field;
    std::size_t i = 0;
    const std::size_t n = text.size();
    bool record_open = false;

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(record));
        record.clear();
        record_open = false;
    };

    while (i < n) {
        const char c = text[i];
        if (c == '"' && field.empty()) {
            record_open = true;
            ++i;
            bool closed = false;
            while (i < n) {
                if (text[i] == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        closed = true;
                        ++i;
                        break;
                    }
                } else {
                    field.push_back(text[i++]);
                }
            }
            if (!closed) throw MalformedRow(records.size() + 1, "unterminated quoted field");
            if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                throw MalformedRow(records.size() + 1, "unexpected character after closing quote");
            }
        } else if (c == ',') {
            record_open = true;
            record.push_back(std::move(field));
            field.clear();
            ++i;
        } else if (c == '\r' || c == '\n') {
            if (record_open || !field.empty()) end_record();
            ++i;
            if (c == '\r' && i < n && text[i] == '\n') ++i;
        } else {
            record_open = true;
            field.push_back(c);
            ++i;
        }
    }
    if (record_open || !field.empty()) end_record();
    return records;
}

std::string format_csv_record(std::span<const std::string> fields) {
    std::string out;
    for (std::size_t f = 0; f < fields.size(); ++f) {
        if (f) out.push_back(',');
        out.push_back('"');
        for (char ch : fields[f]) {
            if (ch == '"') out.push_back('"');
            out.push_back(ch);
        }
        out.push_back('"');
    }
    out.push_back('\n');
    return out;
}

LabeledCorpus parse_labeled_csv(std::string_view text, std::size_t num_classes) {
    if (num_classes < 2) throw UsageError("num_classes must be at least 2");
    const std::vector<CsvRecord> records = parse_csv(text);
    if (records.empty()) throw DataError("empty CSV file");

    std::vector<Document> docs;
    docs.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        const CsvRecord& rec = records[r];
        const std::size_t row = r + 1;
        if (rec.size() < 2) throw MalformedRow(row, "expected a label and at least one text field");
        long label = 0;
        const std::string& lf = rec[0];
        auto [ptr, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), label);
        if (ec != std::errc() || ptr != lf.data() + lf.size() || lf.empty()) {
            throw MalformedRow(row, "label is not an integer: '" + lf + "'");
        }
        if (label < 1 || static_cast<std::size_t>(label) > num_classes) throw LabelOutOfRange(row, label);

        std::string body;
        for (std::size_t f = 1; f < rec.size(); ++f) {
            if (f > 1) body.push_back(' ');
            body += rec[f];
        }
        if (is_blank(body)) throw MalformedRow(row, "empty text");
        docs.push_back({static_cast<DocId>(r), static_cast<ClassId>(label - 1), std::move(body)});
    }
    return LabeledCorpus(std::move(docs), num_classes);
}

LabeledCorpus load_csv(const std::filesystem::path& path, std::size_t num_classes) {
    return parse_labeled_csv(read_file(path), num_classes);
}

void write_csv(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    std::string out;
    for (const Document& d : corpus.documents()) {
        const std::string fields[] = {std::to_string(d.label + 1), d.text};
        out += format_csv_record(fields);
    }
    write_file(path, out);
}

void SyntheticSpec::validate() const {
    if (num_classes < 2) throw UsageError("synthetic corpus needs num_classes >= 2");
    if (docs_per_class == 0 || class_vocab_size == 0 || shared_vocab_size == 0) {
        throw UsageError("synthetic corpus counts must be positive");
    }
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw UsageError("noise_rate must lie in [0, 1]");
    if (doc_length_range.first == 0 || doc_length_range.first > doc_length_range.second) {
        throw UsageError("doc_length_range must be a non-empty positive interval");
    }
}

namespace {

// Cumulative Zipf(1) weights over ranks 1..size.
std::vector<double> zipf_cdf(std::size_t size) {
    std::vector<double> cdf(size);
    double total = 0.0;
    for (std::size_t r = 0; r < size; ++r) {
        total += 1.0 / static_cast<double>(r + 1);
        cdf[r] = total;
    }
    for (double& v : cdf) v /= total;
    return cdf;
}

std::size_t draw(const std::vector<double>& cdf, Rng& rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

LabeledCorpus generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::vector<double> class_cdf = zipf_cdf(spec.class_vocab_size);
    const std::vector<double> shared_cdf = zipf_cdf(spec.shared_vocab_size);
    // share = u^k with u uniform has mean 1 / (k + 1) = noise_rate.
    const double exponent = spec.noise_rate > 0.0 ? (1.0 - spec.noise_rate) / spec.noise_rate : 0.0;
    const auto [min_len, max_len] = spec.doc_length_range;

    std::vector<std::pair<ClassId, std::string>> drafts;
    drafts.reserve(spec.num_classes * spec.docs_per_class);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        for (std::size_t k = 0; k < spec.docs_per_class; ++k) {
            const std::size_t len = min_len + rng.below(max_len - min_len + 1);
            const double u = rng.uniform();
            const double share = spec.noise_rate > 0.0 ? std::pow(u, exponent) : 0.0;
            std::string text;
            for (std::size_t t = 0; t < len; ++t) {
                if (t) text.push_back(' ');
                if (rng.uniform() < share) {
                    text += "s" + std::to_string(draw(shared_cdf, rng));
                } else {
                    text += "c" + std::to_string(c) + "w" + std::to_string(draw(class_cdf, rng));
                }
            }
            drafts.emplace_back(static_cast<ClassId>(c), std::move(text));
        }
    }
    rng.shuffle(std::span(drafts));

    std::vector<Document> docs;
    docs.reserve(drafts.size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        docs.push_back({static_cast<DocId>(i), drafts[i].first, std::move(drafts[i].second)});
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < spec.num_classes; ++c) names.push_back("topic" + std::to_string(c));
    return LabeledCorpus(std::move(docs), spec.num_classes, std::move(names));
}

SurrogateManifest make_manifest(std::string source, std::string strategy, std::uint64_t seed,
                                std::size_t rounds, std::vector<SurrogateEntry> per_id,
                                std::size_t corpus_size) {
    if (corpus_size == 0) throw DataError("manifest for an empty corpus");
    SurrogateManifest m;
    m.source = std::move(source);
    m.strategy = std::move(strategy);
    m.seed = seed;
    m.rounds = rounds;
    m.compression_ratio = static_cast<double>(per_id.size()) / static_cast<double>(corpus_size);
    m.per_id = std::move(per_id);
    return m;
}

std::string manifest_to_json(const SurrogateManifest& manifest) {
    nlohmann::ordered_json j;
    j["source"] = manifest.source;
    j["strategy"] = manifest.strategy;
    j["seed"] = manifest.seed;
    j["rounds"] = manifest.rounds;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const SurrogateEntry& e : manifest.per_id) {
        nlohmann::ordered_json row;
        row["id"] = e.id;
        row["round"] = e.round;
        row["score"] = e.score ? nlohmann::ordered_json(*e.score) : nlohmann::ordered_json(nullptr);
        per.push_back(std::move(row));
    }
    j["per_id"] = std::move(per);
    j["compression_ratio"] = manifest.compression_ratio;
    return j.dump(2) + "\n";
}

void export_surrogate(const LabeledCorpus& corpus, std::span<const DocId> acquired_ids,
                      const SurrogateManifest& manifest, const std::filesystem::path& out_dir) {
    std::map<DocId, const SurrogateEntry*> provenance;
    for (const SurrogateEntry& e : manifest.per_id) {
        if (!provenance.emplace(e.id, &e).second) {
            throw DataError("manifest lists id " + std::to_string(e.id) + " twice");
        }
    }
    std::set<DocId> acquired;
    for (DocId id : acquired_ids) {
        if (id >= corpus.size()) throw DataError("id " + std::to_string(id) + " is not in the corpus");
        if (!acquired.insert(id).second) throw DataError("id " + std::to_string(id) + " exported twice");
        if (!provenance.contains(id)) throw DataError("no provenance for id " + std::to_string(id));
    }
    if (acquired.size() != provenance.size()) throw DataError("manifest provenance covers ids that are not exported");

    std::vector<const SurrogateEntry*> order;
    order.reserve(provenance.size());
    for (const auto& [id, entry] : provenance) order.push_back(entry);
    std::stable_sort(order.begin(), order.end(), [](const SurrogateEntry* a, const SurrogateEntry* b) {
        return a->round != b->round ? a->round < b->round : a->id < b->id;
    });

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

    std::string csv;
    for (const SurrogateEntry* e : order) {
        const Document& d = corpus[e->id];
        const std::string fields[] = {std::to_string(d.label + 1), d.text};
        csv += format_csv_record(fields);
    }
    write_file(out_dir / "surrogate.csv", csv);
    write_file(out_dir / "manifest.json", manifest_to_json(manifest));
}

namespace {

std::vector<std::string> read_class_names(const std::filesystem::path& path) {
    std::vector<std::string> names;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!is_blank(line)) names.push_back(line);
    }
    return names;
}

}  // namespace

CorpusBundle load_corpus_dir(const std::filesystem::path& dir, std::optional<std::size_t> num_classes) {
    if (!std::filesystem::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
    std::vector<std::string> names;
    if (std::filesystem::exists(dir / "classes.txt")) names = read_class_names(dir / "classes.txt");
    if (!num_classes) {
        if (names.empty()) throw UsageError("--num-classes is required when classes.txt is absent");
        num_classes = names.size();
    }
    if (!names.empty() && names.size() != *num_classes) {
        throw DataError("classes.txt lists " + std::to_string(names.size()) + " classes, expected " +
                        std::to_string(*num_classes));
    }
    auto with_names = [&](LabeledCorpus c) {
        if (names.empty()) return c;
        return LabeledCorpus(c.documents(), c.num_classes(), names);
    };
    CorpusBundle bundle{with_names(load_csv(dir / "train.csv", *num_classes)), std::nullopt};
    if (std::filesystem::exists(dir / "test.csv")) bundle.test = with_names(load_csv(dir / "test.csv", *num_classes));
    return bundle;
}

void write_corpus_dir(const CorpusBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    write_csv(bundle.train, dir / "train.csv");
    if (bundle.test) write_csv(*bundle.test, dir / "test.csv");
    std::string names;
    for (const std::string& n : bundle.train.class_names()) names += n + "\n";
    write_file(dir / "classes.txt", names);
}

}  // namespace albias
