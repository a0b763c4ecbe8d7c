#pragma once

// Independent reference implementations used only by tests. Each one is written
// straight from the definition and shares no code path with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "albias/corpus.hpp"
#include "albias/matrix.hpp"

namespace oracle {

using albias::DocId;
using albias::Matrix;

struct Calibration {
    double nll, brier, ece, varr, ent, std;
};

inline Calibration calibration(const Matrix& p, const std::vector<albias::ClassId>& y) {
    const std::size_t n = p.rows, c = p.cols;
    Calibration out{0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        out.nll += -std::log(std::max(p(i, y[i]), 1e-12));
        for (std::size_t k = 0; k < c; ++k) {
            const double t = (k == y[i]) ? 1.0 : 0.0;
            out.brier += std::pow(p(i, k) - t, 2);
            out.ent += p(i, k) > 0 ? -p(i, k) * std::log(p(i, k)) : 0.0;
        }
        double m = 0;
        for (std::size_t k = 0; k < c; ++k) m += p(i, k) / c;
        double v = 0;
        for (std::size_t k = 0; k < c; ++k) v += (p(i, k) - m) * (p(i, k) - m) / c;
        out.std += std::sqrt(v);
        double best = -1;
        for (std::size_t k = 0; k < c; ++k) best = std::max(best, p(i, k));
        out.varr += 1.0 - best;
    }
    for (int b = 0; b < 10; ++b) {
        const double lo = b / 10.0, hi = (b + 1) / 10.0;
        double conf = 0, correct = 0, count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t arg = 0;
            for (std::size_t k = 1; k < c; ++k)
                if (p(i, k) > p(i, arg)) arg = k;
            const double top = p(i, arg);
            const bool in_bin = (b == 0) ? (top <= hi) : (top > lo && top <= hi);
            if (!in_bin) continue;
            conf += top;
            correct += (arg == y[i]);
            count += 1;
        }
        if (count > 0) out.ece += count / n * std::abs(correct / count - conf / count);
    }
    out.nll /= n;
    out.brier /= n;
    out.ent /= n;
    out.std /= n;
    out.varr /= n;
    return out;
}

/// Greedy k-center recomputing every nearest-center distance from scratch each step.
inline std::vector<DocId> kcenter(const std::vector<std::vector<double>>& pool, const std::vector<DocId>& ids,
                                  std::vector<std::vector<double>> centers, std::size_t k) {
    std::vector<DocId> picked;
    std::set<std::size_t> used;
    for (std::size_t step = 0; step < k && used.size() < pool.size(); ++step) {
        std::size_t best = pool.size();
        double best_d = -1;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (used.count(i)) continue;
            double d = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) {
                double s = 0;
                for (std::size_t j = 0; j < c.size(); ++j) s += (pool[i][j] - c[j]) * (pool[i][j] - c[j]);
                d = std::min(d, std::sqrt(s));
            }
            if (d > best_d || (d == best_d && ids[i] < ids[best])) {
                best = i;
                best_d = d;
            }
        }
        used.insert(best);
        picked.push_back(ids[best]);
        centers.push_back(pool[best]);
    }
    return picked;
}

/// Sort everything by (score desc, id asc) and keep the first k.
inline std::vector<DocId> topk(const std::vector<DocId>& ids, const std::vector<double>& scores, std::size_t k) {
    std::vector<std::pair<double, DocId>> all;
    for (std::size_t i = 0; i < ids.size(); ++i) all.emplace_back(-scores[i], ids[i]);
    std::sort(all.begin(), all.end());
    std::vector<DocId> out;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
    return out;
}

/// Bayes rule from raw feature rows: prior from counts, multinomial likelihood with
/// additive smoothing computed from per-class feature sums.
inline std::vector<double> bayes_posterior(const std::vector<std::map<std::uint32_t, double>>& rows,
                                           const std::vector<albias::ClassId>& labels, std::size_t classes,
                                           std::size_t features, double alpha,
                                           const std::map<std::uint32_t, double>& query) {
    std::vector<double> unnorm(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        double docs = 0;
        std::vector<double> mass(features, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (labels[i] != c) continue;
            docs += 1;
            for (const auto& [j, v] : rows[i]) mass[j] += v;
        }
        if (docs == 0) {
            unnorm[c] = 0;
            continue;
        }
        double total = 0;
        for (double m : mass) total += m + alpha;
        double prob = docs / rows.size();
        for (const auto& [j, v] : query) prob *= std::pow((mass[j] + alpha) / total, v);
        unnorm[c] = prob;
    }
    double z = 0;
    for (double u : unnorm) z += u;
    for (double& u : unnorm) u /= z;
    return unnorm;
}

}  // namespace oracle
