#pragma once

#include <span>

#include "albias/corpus.hpp"
#include "albias/matrix.hpp"

namespace albias::diag {

/// Probability floor shared by every log taken over a predicted or sampled distribution.
inline constexpr double kProbabilityFloor = 1e-12;

/// Calibration and confidence statistics of a set of predictions.
///
/// - nll: mean of -ln max(p_true, 1e-12)
/// - brier: mean of sum_c (p_c - [c == y])^2, in [0, 2]
/// - ece: 10 equal-width right-closed confidence bins on max_c p_c; sum over bins of
///   (bin size / n) * |accuracy - mean confidence|. A confidence of exactly 0 lands in the first bin.
/// - variation_ratio: mean of 1 - max_c p_c
/// - mean_entropy: mean of -sum_c p_c ln p_c
/// - mean_std: mean over predictions of the population standard deviation of the C entries
///
/// variation_ratio and mean_std are conventions for a single deterministic model.
struct CalibrationReport {
    std::size_t count = 0;
    double nll = 0.0;
    double brier = 0.0;
    double ece = 0.0;
    double variation_ratio = 0.0;
    double mean_entropy = 0.0;
    double mean_std = 0.0;
};

inline constexpr std::size_t kCalibrationBins = 10;

/// Rows of `probs` are predictive distributions; predicted class is the argmax with
/// ties to the lower index. Throws on a length mismatch or a row off the simplex.
CalibrationReport calibration(const Matrix& probs, std::span<const ClassId> labels);

}  // namespace albias::diag
