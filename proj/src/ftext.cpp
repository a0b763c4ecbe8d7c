#include "albias/ftext.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "albias/error.hpp"
#include "albias/parallel.hpp"
#include "albias/random.hpp"

namespace albias::ftext {

namespace {

constexpr const char* kFormatTag = "albias-ftext";
constexpr int kFormatVersion = 1;

bool is_split_char(unsigned char c) {
    return c < 0x80 && (std::isspace(c) != 0 || std::ispunct(c) != 0 || std::iscntrl(c) != 0);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_split_char(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t FeatureHasher::bucket(std::string_view a, std::string_view b) const {
    std::string joined;
    joined.reserve(a.size() + b.size() + 1);
    joined.append(a);
    joined.push_back(kSeparator);
    joined.append(b);
    return fnv1a64(joined) % bucket_count;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
    for (std::string& t : tokens) add(t);
}

std::uint32_t Vocabulary::add(const std::string& token) {
    auto [it, inserted] = index_.emplace(token, static_cast<std::uint32_t>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
}

const std::uint32_t* Vocabulary::find(std::string_view token) const {
    auto it = index_.find(token);
    return it == index_.end() ? nullptr : &it->second;
}

std::vector<FeatureId> featurize(std::span<const std::string> tokens, const FeatureHasher& hasher,
                                 const Vocabulary& vocab) {
    std::vector<FeatureId> ids;
    ids.reserve(2 * tokens.size());
    for (const std::string& t : tokens) {
        if (const std::uint32_t* id = vocab.find(t)) ids.push_back(*id);
    }
    const FeatureId offset = vocab.size();
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        ids.push_back(offset + hasher.bucket(tokens[i], tokens[i + 1]));
    }
    return ids;
}

void FtTrainConfig::validate() const {
    if (dim == 0) throw UsageError("embedding dimension must be positive");
    if (epochs == 0) throw UsageError("epochs must be positive");
    if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw UsageError("learning rate must be positive");
    if (bucket_count == 0) throw UsageError("bucket count must be positive");
}

double scheduled_lr(double initial_lr, std::size_t update, std::size_t total) {
    return initial_lr * (1.0 - static_cast<double>(update) / static_cast<double>(total));
}

void initial_row(std::uint64_t seed, FeatureId feature, std::span<double> out) {
    const double bound = 1.0 / (2.0 * static_cast<double>(out.size()));
    std::uint64_t state = derive_seed(seed, feature);
    for (double& v : out) {
        state = splitmix64(state);
        const double u = static_cast<double>(state >> 11) * 0x1.0p-53;
        v = (2.0 * u - 1.0) * bound;
    }
}

LossGradient softmax_xent(const Matrix& output, std::span<const double> hidden, std::size_t label) {
    const std::size_t classes = output.rows;
    const std::size_t d = output.cols;
    LossGradient g;
    g.probs.assign(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        double s = 0.0;
        const auto w = output.row(c);
        for (std::size_t k = 0; k < d; ++k) s += w[k] * hidden[k];
        g.probs[c] = s;
    }
    const double peak = *std::max_element(g.probs.begin(), g.probs.end());
    double z = 0.0;
    for (double& p : g.probs) {
        p = std::exp(p - peak);
        z += p;
    }
    for (double& p : g.probs) p /= z;
    g.loss = -std::log(std::max(g.probs[label], 1e-300));

    g.grad_hidden.assign(d, 0.0);
    g.grad_output = Matrix(classes, d);
    for (std::size_t c = 0; c < classes; ++c) {
        const double delta = g.probs[c] - (c == label ? 1.0 : 0.0);
        const auto w = output.row(c);
        auto gw = g.grad_output.row(c);
        for (std::size_t k = 0; k < d; ++k) {
            gw[k] = delta * hidden[k];
            g.grad_hidden[k] += delta * w[k];
        }
    }
    return g;
}

std::vector<double> mean_rows(const Matrix& embedding, std::span<const std::size_t> ids) {
    std::vector<double> h(embedding.cols, 0.0);
    if (ids.empty()) return h;
    for (std::size_t id : ids) {
        const auto r = embedding.row(id);
        for (std::size_t k = 0; k < h.size(); ++k) h[k] += r[k];
    }
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (double& v : h) v *= inv;
    return h;
}

std::vector<double> FtModel::embedding_row(FeatureId feature) const {
    std::vector<double> r(config_.dim);
    if (auto it = row_of_.find(feature); it != row_of_.end()) {
        const auto stored = rows_.row(it->second);
        std::copy(stored.begin(), stored.end(), r.begin());
    } else {
        initial_row(config_.seed, feature, r);
    }
    return r;
}

std::vector<FeatureId> FtModel::features(std::string_view text) const {
    const std::vector<std::string> tokens = tokenize(text);
    return featurize(tokens, hasher_, vocab_);
}

std::vector<double> FtModel::hidden(std::span<const FeatureId> features) const {
    std::vector<double> h(config_.dim, 0.0);
    if (features.empty()) return h;
    std::vector<double> scratch(config_.dim);
    for (FeatureId f : features) {
        std::span<const double> r;
        if (auto it = row_of_.find(f); it != row_of_.end()) {
            r = rows_.row(it->second);
        } else {
            initial_row(config_.seed, f, scratch);
            r = scratch;
        }
        for (std::size_t k = 0; k < h.size(); ++k) h[k] += r[k];
    }
    const double inv = 1.0 / static_cast<double>(features.size());
    for (double& v : h) v *= inv;
    return h;
}

std::vector<double> FtModel::sentence_embedding(std::string_view text) const {
    return hidden(features(text));
}

std::vector<double> FtModel::predict_proba(std::string_view text) const {
    const std::vector<double> h = sentence_embedding(text);
    return softmax_xent(output_, h, 0).probs;
}

Matrix FtModel::predict_proba(const LabeledCorpus& corpus, std::span<const DocId> ids) const {
    Matrix out(ids.size(), num_classes());
    parallel_for(ids.size(), [&](std::size_t i) {
        const std::vector<double> p = predict_proba(corpus[ids[i]].text);
        std::copy(p.begin(), p.end(), out.row(i).begin());
    });
    return out;
}

Matrix FtModel::sentence_embeddings(const LabeledCorpus& corpus, std::span<const DocId> ids) const {
    Matrix out(ids.size(), dim());
    parallel_for(ids.size(), [&](std::size_t i) {
        const std::vector<double> e = sentence_embedding(corpus[ids[i]].text);
        std::copy(e.begin(), e.end(), out.row(i).begin());
    });
    return out;
}

FtModel train(const LabeledCorpus& corpus, std::span<const DocId> ids, const FtTrainConfig& config) {
    config.validate();
    if (ids.empty()) throw ComputeError("cannot train on an empty subset");
    const std::size_t classes = corpus.num_classes();

    FtModel model;
    model.config_ = config;
    model.hasher_.bucket_count = config.bucket_count;

    std::vector<std::vector<std::string>> tokens(ids.size());
    std::vector<ClassId> labels(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Document& doc = corpus[ids[i]];
        if (doc.label >= classes) throw ComputeError("training label out of range for document " + std::to_string(doc.id));
        labels[i] = doc.label;
        tokens[i] = tokenize(doc.text);
        for (const std::string& t : tokens[i]) model.vocab_.add(t);
    }

    // Map every feature that occurs in training onto a compact row.
    std::vector<std::vector<std::size_t>> rows_of_doc(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (FeatureId f : featurize(tokens[i], model.hasher_, model.vocab_)) {
            auto [it, inserted] = model.row_of_.emplace(f, model.stored_features_.size());
            if (inserted) model.stored_features_.push_back(f);
            rows_of_doc[i].push_back(it->second);
        }
    }
    model.rows_ = Matrix(model.stored_features_.size(), config.dim);
    for (std::size_t r = 0; r < model.stored_features_.size(); ++r) {
        initial_row(config.seed, model.stored_features_[r], model.rows_.row(r));
    }
    model.output_ = Matrix(classes, config.dim, 0.0);

    Rng rng(derive_seed(config.seed, 0x5eed));
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t total = config.epochs * ids.size();
    std::size_t update = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        for (std::size_t s : order) {
            const double lr = scheduled_lr(config.initial_lr, update++, total);
            const std::vector<std::size_t>& doc_rows = rows_of_doc[s];
            const std::vector<double> h = mean_rows(model.rows_, doc_rows);
            const LossGradient g = softmax_xent(model.output_, h, labels[s]);
            for (std::size_t k = 0; k < model.output_.data.size(); ++k) {
                model.output_.data[k] -= lr * g.grad_output.data[k];
            }
            if (doc_rows.empty()) continue;
            const double step = lr / static_cast<double>(doc_rows.size());
            for (std::size_t r : doc_rows) {
                auto row = model.rows_.row(r);
                for (std::size_t k = 0; k < row.size(); ++k) row[k] -= step * g.grad_hidden[k];
            }
        }
    }
    for (double v : model.output_.data) {
        if (!std::isfinite(v)) throw ComputeError("training diverged: non-finite output weights");
    }
    for (double v : model.rows_.data) {
        if (!std::isfinite(v)) throw ComputeError("training diverged: non-finite embeddings");
    }
    return model;
}

std::string FtModel::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = kFormatTag;
    j["version"] = kFormatVersion;
    j["config"] = {{"dim", config_.dim},
                   {"epochs", config_.epochs},
                   {"initial_lr", config_.initial_lr},
                   {"seed", config_.seed},
                   {"bucket_count", config_.bucket_count}};
    j["num_classes"] = output_.rows;
    j["vocabulary"] = vocab_.tokens();
    j["output"] = output_.data;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < stored_features_.size(); ++r) {
        const auto values = rows_.row(r);
        rows.push_back({{"feature", stored_features_[r]},
                        {"values", std::vector<double>(values.begin(), values.end())}});
    }
    j["embedding_rows"] = std::move(rows);
    return j.dump();
}

FtModel FtModel::from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model blob is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kFormatTag) throw DataError("not an ftext model blob");
    if (j.value("version", 0) != kFormatVersion) throw DataError("unsupported ftext model version");
    try {
        FtModel m;
        const auto& c = j.at("config");
        m.config_.dim = c.at("dim").get<std::size_t>();
        m.config_.epochs = c.at("epochs").get<std::size_t>();
        m.config_.initial_lr = c.at("initial_lr").get<double>();
        m.config_.seed = c.at("seed").get<std::uint64_t>();
        m.config_.bucket_count = c.at("bucket_count").get<std::uint64_t>();
        m.config_.validate();
        m.hasher_.bucket_count = m.config_.bucket_count;
        m.vocab_ = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
        const auto classes = j.at("num_classes").get<std::size_t>();
        m.output_ = Matrix(classes, m.config_.dim);
        m.output_.data = j.at("output").get<std::vector<double>>();
        if (m.output_.data.size() != classes * m.config_.dim) throw DataError("output matrix has the wrong size");
        const auto& rows = j.at("embedding_rows");
        m.rows_ = Matrix(rows.size(), m.config_.dim);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto f = rows[r].at("feature").get<FeatureId>();
            const auto values = rows[r].at("values").get<std::vector<double>>();
            if (values.size() != m.config_.dim) throw DataError("embedding row has the wrong size");
            m.row_of_.emplace(f, r);
            m.stored_features_.push_back(f);
            std::copy(values.begin(), values.end(), m.rows_.row(r).begin());
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed ftext model blob: ") + e.what());
    }
}

void FtModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json();
}

FtModel FtModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

bool operator==(const FtModel& a, const FtModel& b) {
    return a.config_.dim == b.config_.dim && a.config_.epochs == b.config_.epochs &&
           a.config_.initial_lr == b.config_.initial_lr && a.config_.seed == b.config_.seed &&
           a.config_.bucket_count == b.config_.bucket_count && a.vocab_.tokens() == b.vocab_.tokens() &&
           a.stored_features_ == b.stored_features_ && a.rows_ == b.rows_ && a.output_ == b.output_;
}

}  // namespace albias::ftext
