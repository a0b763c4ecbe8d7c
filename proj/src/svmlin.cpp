#include "albias/svmlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "albias/error.hpp"
#include "albias/parallel.hpp"
#include "albias/random.hpp"

namespace albias::svmlin {

namespace {

double dot_augmented(std::span<const double> w, double bias, std::span<const double> x) {
    double s = bias;
    for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * x[k];
    return s;
}

double squared_norm(const PairModel& p) {
    double s = p.bias * p.bias;
    for (double v : p.weights) s += v * v;
    return s;
}

PairModel solve_pair(const Matrix& x, std::span<const ClassId> labels, ClassId pos, ClassId neg,
                     const SvmConfig& config, std::uint64_t pair_seed) {
    PairModel p;
    p.positive = pos;
    p.negative = neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == pos || labels[i] == neg) p.rows.push_back(i);
    }
    const std::size_t m = p.rows.size();
    const std::size_t d = x.cols;
    p.weights.assign(d, 0.0);
    p.alpha.assign(m, 0.0);

    std::vector<double> y(m), q(m);
    for (std::size_t t = 0; t < m; ++t) {
        y[t] = labels[p.rows[t]] == pos ? 1.0 : -1.0;
        double s = 1.0;  // bias feature
        for (double v : x.row(p.rows[t])) s += v * v;
        q[t] = s;
    }

    Rng rng(pair_seed);
    std::vector<std::size_t> order(m);
    for (std::size_t t = 0; t < m; ++t) order[t] = t;

    double best_primal = std::numeric_limits<double>::infinity();
    for (p.epochs = 0; p.epochs < config.max_iterations;) {
        rng.shuffle(std::span(order));
        double violation = 0.0;
        for (std::size_t t : order) {
            const auto xi = x.row(p.rows[t]);
            const double g = y[t] * dot_augmented(p.weights, p.bias, xi) - 1.0;
            double pg = g;
            if (p.alpha[t] <= 0.0) {
                pg = std::min(g, 0.0);
            } else if (p.alpha[t] >= config.C) {
                pg = std::max(g, 0.0);
            }
            violation = std::max(violation, std::abs(pg));
            if (std::abs(pg) > 1e-12) {
                const double old = p.alpha[t];
                p.alpha[t] = std::clamp(old - g / q[t], 0.0, config.C);
                const double step = (p.alpha[t] - old) * y[t];
                for (std::size_t k = 0; k < d; ++k) p.weights[k] += step * xi[k];
                p.bias += step;
            }
        }
        ++p.epochs;
        p.max_violation = violation;
        best_primal = std::min(best_primal, primal_objective(p, x, labels, config.C));
        p.gap_trace.push_back(best_primal - dual_objective(p));
        if (violation < config.tolerance) {
            p.converged = true;
            break;
        }
    }
    return p;
}

}  // namespace

void SvmConfig::validate() const {
    if (!(C > 0.0)) throw UsageError("SVM regularization C must be positive");
    if (!(tolerance > 0.0)) throw UsageError("SVM tolerance must be positive");
    if (max_iterations == 0) throw UsageError("SVM iteration cap must be positive");
}

double PairModel::decision(std::span<const double> x) const { return dot_augmented(weights, bias, x); }

double primal_objective(const PairModel& pair, const Matrix& embeddings, std::span<const ClassId> labels, double C) {
    double hinge = 0.0;
    for (std::size_t row : pair.rows) {
        const double y = labels[row] == pair.positive ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * pair.decision(embeddings.row(row)));
    }
    return 0.5 * squared_norm(pair) + C * hinge;
}

double dual_objective(const PairModel& pair) {
    double s = 0.0;
    for (double a : pair.alpha) s += a;
    return s - 0.5 * squared_norm(pair);
}

SvmModel::SvmModel(std::size_t num_classes, std::vector<PairModel> pairs, double support_threshold)
    : num_classes_(num_classes), pairs_(std::move(pairs)) {
    std::set<std::size_t> support;
    for (const PairModel& p : pairs_) {
        for (std::size_t t = 0; t < p.rows.size(); ++t) {
            if (p.alpha[t] > support_threshold) support.insert(p.rows[t]);
        }
    }
    support_rows_.assign(support.begin(), support.end());
}

ClassId SvmModel::predict(std::span<const double> x) const {
    std::vector<std::size_t> votes(num_classes_, 0);
    for (const PairModel& p : pairs_) ++votes[p.decision(x) > 0.0 ? p.positive : p.negative];
    return static_cast<ClassId>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

SvmModel train_svm(const Matrix& embeddings, std::span<const ClassId> labels, const SvmConfig& config) {
    config.validate();
    if (embeddings.rows != labels.size()) throw ComputeError("embedding rows and labels differ in count");
    if (embeddings.rows < 2) throw ComputeError("SVM training needs at least two points");
    for (double v : embeddings.data) {
        if (!std::isfinite(v)) throw ComputeError("non-finite embedding value");
    }
    ClassId top = 0;
    for (ClassId y : labels) top = std::max(top, y);
    const std::size_t classes = static_cast<std::size_t>(top) + 1;
    std::vector<bool> present(classes, false);
    for (ClassId y : labels) present[y] = true;
    std::vector<ClassId> seen;
    for (ClassId c = 0; c < classes; ++c) {
        if (present[c]) seen.push_back(c);
    }
    if (seen.size() < 2) throw ComputeError("SVM training needs at least two classes");

    std::vector<std::pair<ClassId, ClassId>> jobs;
    for (std::size_t a = 0; a < seen.size(); ++a) {
        for (std::size_t b = a + 1; b < seen.size(); ++b) jobs.emplace_back(seen[a], seen[b]);
    }
    std::vector<PairModel> pairs(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        const auto [pos, neg] = jobs[j];
        pairs[j] = solve_pair(embeddings, labels, pos, neg, config, derive_seed(config.seed, pos * classes + neg));
    });
    return SvmModel(classes, std::move(pairs), config.support_threshold);
}

std::vector<DocId> support_ids(const SvmModel& model, std::span<const DocId> ids) {
    std::vector<DocId> out;
    out.reserve(model.support_rows().size());
    for (std::size_t r : model.support_rows()) out.push_back(ids[r]);
    std::sort(out.begin(), out.end());
    return out;
}

double support_overlap(std::span<const DocId> supports, std::span<const DocId> acquired) {
    const std::set<DocId> s(supports.begin(), supports.end());
    if (s.empty()) throw ComputeError("support overlap is undefined for an empty support set");
    const std::set<DocId> a(acquired.begin(), acquired.end());
    std::size_t common = 0;
    for (DocId id : s) common += a.contains(id) ? 1 : 0;
    return 100.0 * static_cast<double>(common) / static_cast<double>(s.size());
}

}  // namespace albias::svmlin
