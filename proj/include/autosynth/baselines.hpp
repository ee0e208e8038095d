// Comparator aggregators over a normalized matrix: arithmetic mean, the
// adjusted mean-plus-penalty index (row mean +/- sigma * CV), and the first
// principal component, plus the two-phase hierarchical pipeline.
#pragma once

#include "autosynth/autoencoder.hpp"
#include "autosynth/normalize.hpp"
#include "autosynth/types.hpp"

#include <utility>
#include <vector>

namespace autosynth {

struct PcaModel {
    Eigen::VectorXd component;       // length p, unit norm
    double explained_variance_ratio = 0.0;
    Eigen::VectorXd center;          // length p column means
};

/// Per-unit arithmetic mean of the normalized indicators.
IndexResult mean_index(const NormalizedMatrix& R);

/// Row mean plus (Plus) or minus (Minus) the variability penalty
/// sigma_i * CV_i, with the population standard deviation. Plus suits
/// negative phenomena such as vulnerability.
/// Throws NumericError when a row mean is zero (CV undefined).
IndexResult ampi_index(const NormalizedMatrix& R, AmpiSign sign);

/// First-principal-axis scores of the column-centered matrix, rescaled to
/// [70, 130] and polarity-aligned against the AMPI-Plus compass.
/// Throws NumericError on zero total variance.
std::pair<IndexResult, PcaModel> pca_index(const NormalizedMatrix& R);

struct HierarchicalOptions {
    AmpiSign ampi_sign = AmpiSign::Plus;
    TrainConfig autosynth;
    int autosynth_replications = 10;
    int threads = 0;
};

struct HierarchicalResult {
    std::vector<std::string> domains;       // in order of first appearance
    std::vector<IndexResult> domain_indices;
    IndexResult final_index;
};

/// Two-phase aggregation: the method is applied within each domain group,
/// then the per-domain indices are renormalized and aggregated once more.
/// Every indicator must carry a nonempty domain label and there must be at
/// least two domains. A single-indicator domain passes through as its
/// normalized column.
HierarchicalResult hierarchical_index(const IndicatorDataset& dataset, Method method,
                                      const HierarchicalOptions& options = {});

}  // namespace autosynth
