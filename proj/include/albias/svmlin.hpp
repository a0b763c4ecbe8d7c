#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "albias/corpus.hpp"
#include "albias/matrix.hpp"

// One-vs-one linear SVM (hinge loss) solved in the dual by coordinate descent.
namespace albias::svmlin {

struct SvmConfig {
    double C = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iterations = 1000;  // epochs over a pair's points
    std::uint64_t seed = 0;
    /// alpha_i above this counts as a support vector.
    double support_threshold = 1e-8;

    void validate() const;
};

/// Binary sub-problem between classes `positive` (y = +1) and `negative` (y = -1).
/// The bias is an extra constant-1 feature and is regularized with the weights.
struct PairModel {
    ClassId positive = 0;
    ClassId negative = 0;
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<std::size_t> rows;  // training rows in this pair
    std::vector<double> alpha;      // dual coefficient per entry of `rows`
    std::size_t epochs = 0;
    bool converged = false;
    double max_violation = 0.0;     // largest projected gradient in the last epoch
    /// Lowest primal objective seen so far minus the current dual, after each epoch.
    std::vector<double> gap_trace;

    double decision(std::span<const double> x) const;
};

class SvmModel {
public:
    SvmModel(std::size_t num_classes, std::vector<PairModel> pairs, double support_threshold);

    std::size_t num_classes() const noexcept { return num_classes_; }
    const std::vector<PairModel>& pairs() const noexcept { return pairs_; }
    /// Sorted training rows with alpha above the threshold in at least one pair.
    const std::vector<std::size_t>& support_rows() const noexcept { return support_rows_; }

    /// One-vs-one vote; ties go to the lower class index.
    ClassId predict(std::span<const double> x) const;

private:
    std::size_t num_classes_;
    std::vector<PairModel> pairs_;
    std::vector<std::size_t> support_rows_;
};

/// Dual coordinate descent per class pair until the largest projected-gradient
/// violation drops below tolerance or the epoch cap is hit. Each epoch visits the
/// pair's points in a seeded random order.
SvmModel train_svm(const Matrix& embeddings, std::span<const ClassId> labels, const SvmConfig& config = {});

/// Primal objective 0.5 |w~|^2 + C sum hinge, over the pair's rows.
double primal_objective(const PairModel& pair, const Matrix& embeddings, std::span<const ClassId> labels, double C);
/// Dual objective sum(alpha) - 0.5 |w~|^2.
double dual_objective(const PairModel& pair);

/// Maps support rows through `ids` (row i of the embedding matrix is document ids[i]).
std::vector<DocId> support_ids(const SvmModel& model, std::span<const DocId> ids);

/// 100 * |supports ∩ acquired| / |supports|. Throws on an empty support set.
double support_overlap(std::span<const DocId> supports, std::span<const DocId> acquired);

}  // namespace albias::svmlin
