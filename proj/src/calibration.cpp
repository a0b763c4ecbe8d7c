#include "albias/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "albias/acquisition.hpp"
#include "albias/error.hpp"

namespace albias::diag {

CalibrationReport calibration(const Matrix& probs, std::span<const ClassId> labels) {
    if (probs.rows != labels.size()) throw ComputeError("prediction and label counts differ");
    if (probs.rows == 0) throw ComputeError("calibration of an empty prediction set");
    const std::size_t n = probs.rows;
    const std::size_t c = probs.cols;

    CalibrationReport r;
    r.count = n;
    std::array<double, kCalibrationBins> bin_conf{}, bin_correct{};
    std::array<std::size_t, kCalibrationBins> bin_count{};

    for (std::size_t i = 0; i < n; ++i) {
        const auto p = probs.row(i);
        al::check_simplex(p);
        const ClassId y = labels[i];
        if (y >= c) throw ComputeError("label out of range in calibration");

        r.nll += -std::log(std::max(p[y], kProbabilityFloor));
        double mean = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            const double target = k == y ? 1.0 : 0.0;
            r.brier += (p[k] - target) * (p[k] - target);
            if (p[k] > 0.0) r.mean_entropy -= p[k] * std::log(p[k]);
            mean += p[k];
        }
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (double v : p) var += (v - mean) * (v - mean);
        r.mean_std += std::sqrt(var / static_cast<double>(c));

        const auto top = std::max_element(p.begin(), p.end());
        const double conf = *top;
        const auto predicted = static_cast<ClassId>(top - p.begin());
        r.variation_ratio += 1.0 - conf;

        auto bin = static_cast<std::ptrdiff_t>(std::ceil(conf * static_cast<double>(kCalibrationBins))) - 1;
        bin = std::clamp<std::ptrdiff_t>(bin, 0, kCalibrationBins - 1);
        bin_conf[bin] += conf;
        bin_correct[bin] += predicted == y ? 1.0 : 0.0;
        ++bin_count[bin];
    }
    const double dn = static_cast<double>(n);
    r.nll /= dn;
    r.brier /= dn;
    r.mean_entropy /= dn;
    r.mean_std /= dn;
    r.variation_ratio /= dn;
    for (std::size_t b = 0; b < kCalibrationBins; ++b) {
        if (bin_count[b] == 0) continue;
        const double m = static_cast<double>(bin_count[b]);
        r.ece += (m / dn) * std::abs(bin_correct[b] / m - bin_conf[b] / m);
    }
    return r;
}

}  // namespace albias::diag
