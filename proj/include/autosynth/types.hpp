// Core domain types shared by every module: datasets of elementary
// indicators, index results, method tags and the error hierarchy.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace autosynth {

// ---------------------------------------------------------------------------
// Errors

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input files (CSV, JSON).
struct ParseError : Error {
    using Error::Error;
};

/// Inputs that parse but violate a contract (duplicate names, bad shapes...).
struct ValidationError : Error {
    using Error::Error;
};

/// Numeric failures: divergence, zero denominators, failure budgets.
struct NumericError : Error {
    using Error::Error;
};

/// Training diverged; carries the epoch at which the loss became non-finite.
struct TrainingError : NumericError {
    TrainingError(const std::string& msg, int epoch_)
        : NumericError(msg), epoch(epoch_) {}
    int epoch;
};

// ---------------------------------------------------------------------------
// Enumerations

/// Whether higher raw values align with (Positive) or oppose (Negative) the
/// phenomenon being indexed. Negative indicators are complemented to 200
/// after normalization.
enum class Polarity { Positive, Negative };

/// Aggregation method tag.
enum class Method { Mean, AMPI, PCA, AutoSynth };

/// Sign of the AMPI variability penalty: Plus for negative phenomena
/// (vulnerability), Minus for positive ones.
enum class AmpiSign { Plus, Minus };

inline std::string method_name(Method m) {
    switch (m) {
    case Method::Mean: return "mean";
    case Method::AMPI: return "ampi";
    case Method::PCA: return "pca";
    case Method::AutoSynth: return "autosynth";
    }
    return "unknown";
}

inline Method method_from_name(const std::string& s) {
    if (s == "mean") return Method::Mean;
    if (s == "ampi") return Method::AMPI;
    if (s == "pca") return Method::PCA;
    if (s == "autosynth") return Method::AutoSynth;
    throw ValidationError("unknown method: " + s);
}

// ---------------------------------------------------------------------------
// Dataset types

/// Per-indicator metadata.
struct IndicatorMeta {
    std::string name;
    std::string domain;  // optional group label, may be empty
    Polarity polarity = Polarity::Positive;
    double weight = 0.0;  // nonnegative; sums to 1 across a validated dataset
};

/// Units-by-indicators matrix of raw elementary indicators.
struct IndicatorDataset {
    std::vector<std::string> units;        // length N
    std::vector<IndicatorMeta> indicators; // length p
    Eigen::MatrixXd values;                // N x p

    Eigen::Index n_units() const { return values.rows(); }
    Eigen::Index n_indicators() const { return values.cols(); }
};

/// A computed composite index over the units of a dataset.
struct IndexResult {
    Method method = Method::Mean;
    Eigen::VectorXd values;      // length N
    std::vector<int> ranks;      // permutation of 1..N, 1 = highest value
    Eigen::MatrixXd ensemble;    // N x R, AutoSynth only; 0x0 when absent
    bool polarity_flipped = false;

    bool has_ensemble() const { return ensemble.size() > 0; }
};

// ---------------------------------------------------------------------------
// Ranking

/// Ranks with 1 = highest value; ties broken by order of appearance.
inline std::vector<int> ranks_descending(const Eigen::VectorXd& values) {
    const auto n = static_cast<std::size_t>(values.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[static_cast<Eigen::Index>(a)] > values[static_cast<Eigen::Index>(b)];
    });
    std::vector<int> ranks(n);
    for (std::size_t k = 0; k < n; ++k)
        ranks[order[k]] = static_cast<int>(k) + 1;
    return ranks;
}

inline IndexResult make_index_result(Method m, Eigen::VectorXd values) {
    IndexResult r;
    r.method = m;
    r.ranks = ranks_descending(values);
    r.values = std::move(values);
    return r;
}

}  // namespace autosynth
