#pragma once

#include <span>
#include <vector>

#include "albias/corpus.hpp"
#include "albias/matrix.hpp"

// Scoring and selection rules used to build a query.
namespace albias::al {

/// Throws ComputeError unless p is a probability vector (entries >= -1e-12, sum within 1e-6 of 1).
void check_simplex(std::span<const double> p);

/// -sum p ln p with 0 ln 0 = 0, clamped to [0, ln C].
double score_entropy(std::span<const double> p);

/// 1 - max_c p_c.
double score_lc(std::span<const double> p);

/// Arithmetic mean of the member distributions.
std::vector<double> ensemble_proba(std::span<const std::vector<double>> members);
/// Row-wise mean of equally shaped probability matrices.
Matrix ensemble_proba(std::span<const Matrix> members);

/// The k highest scores, ties to the lower id. Returns min(k, ids.size()) ids, best first.
std::vector<DocId> select_topk(std::span<const DocId> ids, std::span<const double> scores, std::size_t k);

/// The k lowest scores, ties to the lower id (deletion order).
std::vector<DocId> select_bottomk(std::span<const DocId> ids, std::span<const double> scores, std::size_t k);

struct KCenterPick {
    DocId id = 0;
    double distance = 0.0;  // distance to the nearest center when picked
};

/// Greedy k-center: k times, take the pool point farthest (Euclidean) from its nearest
/// center, ties to the lower id, and make it a center. Rows of `pool` pair with `pool_ids`.
/// An empty center set makes every pool point infinitely far at the first step.
std::vector<KCenterPick> kcenter_greedy(const Matrix& pool, std::span<const DocId> pool_ids, const Matrix& centers,
                                        std::size_t k);

}  // namespace albias::al
