// Goalpost Min-Max normalization to the [70, 130] scale with polarity
// handling: r = ((x - lo) / (hi - lo)) * 60 + 70, then Negative-polarity
// columns are complemented to 200.
#pragma once

#include "autosynth/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace autosynth {

enum class GoalpostSource { Observed, Supplied };

struct Goalposts {
    Eigen::VectorXd lo;  // length p
    Eigen::VectorXd hi;  // length p, hi > lo per indicator
    GoalpostSource source = GoalpostSource::Observed;
};

struct NormalizedMatrix {
    Eigen::MatrixXd values;  // N x p
    Goalposts goalposts;
    bool polarity_applied = false;
    std::vector<std::string> warnings;

    Eigen::Index n_units() const { return values.rows(); }
    Eigen::Index n_indicators() const { return values.cols(); }
};

/// Rescales a single column into [70, 130] given its goalposts.
inline double rescale_value(double x, double lo, double hi) {
    return (x - lo) / (hi - lo) * 60.0 + 70.0;
}

/// Rescales a vector to [70, 130] using its observed min/max.
/// Throws NumericError when the vector is constant.
Eigen::VectorXd rescale_to_scale(const Eigen::VectorXd& v);

/// Normalizes a dataset per the goalpost formula. Goalposts default to the
/// observed column min/max; supplied goalposts that exclude observed values
/// are permitted but recorded as warnings.
NormalizedMatrix normalize(const IndicatorDataset& dataset,
                           const std::optional<Goalposts>& goalposts = std::nullopt);

}  // namespace autosynth
