// Stress and rank-stress badness-of-fit measures between the indicator
// matrix and a one-dimensional index, plus rank statistics and the
// method-comparison report.
#pragma once

#include "autosynth/normalize.hpp"
#include "autosynth/types.hpp"

#include <string>
#include <vector>

namespace autosynth {

struct StressReport {
    Method method = Method::Mean;
    double stress = 0.0;
    double rank_stress = 0.0;
    int n_units = 0;
};

struct CompareReport {
    std::vector<StressReport> reports;
    Eigen::MatrixXd spearman;  // k x k pairwise rank correlations
};

/// Average ranks (1 = smallest value); ties receive the mean of the ranks
/// they span.
std::vector<double> average_ranks(const Eigen::VectorXd& values);

/// Spearman rank correlation with average-rank tie handling.
double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Stress over all unordered unit pairs: sqrt(sum (d - d~)^2 / sum d^2),
/// where d is the Euclidean distance between unit rows of R and d~ the
/// absolute difference of index values.
/// Throws NumericError when all pairwise distances are zero.
double stress(const NormalizedMatrix& R, const Eigen::VectorXd& index_values);
double stress(const NormalizedMatrix& R, const IndexResult& index);

/// Same functional applied to ranks: row-mean ranks of R against index
/// ranks, both via the average-rank operator.
double rank_stress(const NormalizedMatrix& R, const Eigen::VectorXd& index_values);
double rank_stress(const NormalizedMatrix& R, const IndexResult& index);

/// Per-method stress reports plus the pairwise Spearman matrix.
/// All results must cover the same number of units as R.
CompareReport compare_methods(const NormalizedMatrix& R,
                              const std::vector<IndexResult>& results);

}  // namespace autosynth
