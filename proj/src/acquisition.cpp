#include "albias/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "albias/error.hpp"

namespace albias::al {

void check_simplex(std::span<const double> p) {
    if (p.empty()) throw ComputeError("empty probability vector");
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < -1e-12) throw ComputeError("probability entry outside [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ComputeError("probability vector does not sum to 1");
}

double score_entropy(std::span<const double> p) {
    check_simplex(p);
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return std::clamp(h, 0.0, std::log(static_cast<double>(p.size())));
}

double score_lc(std::span<const double> p) {
    check_simplex(p);
    return 1.0 - *std::max_element(p.begin(), p.end());
}

std::vector<double> ensemble_proba(std::span<const std::vector<double>> members) {
    if (members.empty()) throw ComputeError("ensemble has no members");
    const std::size_t c = members.front().size();
    std::vector<double> mean(c, 0.0);
    for (const std::vector<double>& m : members) {
        if (m.size() != c) throw ComputeError("ensemble members disagree on the number of classes");
        check_simplex(m);
        for (std::size_t k = 0; k < c; ++k) mean[k] += m[k];
    }
    for (double& v : mean) v /= static_cast<double>(members.size());
    return mean;
}

Matrix ensemble_proba(std::span<const Matrix> members) {
    if (members.empty()) throw ComputeError("ensemble has no members");
    Matrix mean(members.front().rows, members.front().cols, 0.0);
    for (const Matrix& m : members) {
        if (m.rows != mean.rows || m.cols != mean.cols) throw ComputeError("ensemble members disagree in shape");
        for (std::size_t k = 0; k < m.data.size(); ++k) mean.data[k] += m.data[k];
    }
    for (double& v : mean.data) v /= static_cast<double>(members.size());
    return mean;
}

namespace {

std::vector<DocId> select_ranked(std::span<const DocId> ids, std::span<const double> scores, std::size_t k,
                                 bool highest) {
    if (ids.size() != scores.size()) throw ComputeError("ids and scores differ in length");
    for (double s : scores) {
        if (!std::isfinite(s)) throw ComputeError("non-finite acquisition score");
    }
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    k = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return highest ? scores[a] > scores[b] : scores[a] < scores[b];
                          return ids[a] < ids[b];
                      });
    std::vector<DocId> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = ids[order[i]];
    return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

}  // namespace

std::vector<DocId> select_topk(std::span<const DocId> ids, std::span<const double> scores, std::size_t k) {
    return select_ranked(ids, scores, k, true);
}

std::vector<DocId> select_bottomk(std::span<const DocId> ids, std::span<const double> scores, std::size_t k) {
    return select_ranked(ids, scores, k, false);
}

std::vector<KCenterPick> kcenter_greedy(const Matrix& pool, std::span<const DocId> pool_ids, const Matrix& centers,
                                        std::size_t k) {
    if (pool.rows == 0) throw ComputeError("k-center selection from an empty pool");
    if (pool.rows != pool_ids.size()) throw ComputeError("pool embeddings and ids differ in count");
    if (centers.rows > 0 && centers.cols != pool.cols) throw ComputeError("center and pool dimensions differ");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> nearest(pool.rows, kInf);
    for (std::size_t c = 0; c < centers.rows; ++c) {
        for (std::size_t i = 0; i < pool.rows; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(pool.row(i), centers.row(c)));
        }
    }
    std::vector<bool> taken(pool.rows, false);
    std::vector<KCenterPick> picks;
    k = std::min(k, pool.rows);
    picks.reserve(k);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = pool.rows;
        for (std::size_t i = 0; i < pool.rows; ++i) {
            if (taken[i]) continue;
            if (best == pool.rows || nearest[i] > nearest[best] ||
                (nearest[i] == nearest[best] && pool_ids[i] < pool_ids[best])) {
                best = i;
            }
        }
        taken[best] = true;
        picks.push_back({pool_ids[best], std::sqrt(nearest[best])});
        for (std::size_t i = 0; i < pool.rows; ++i) {
            if (!taken[i]) nearest[i] = std::min(nearest[i], squared_distance(pool.row(i), pool.row(best)));
        }
    }
    return picks;
}

}  // namespace albias::al
