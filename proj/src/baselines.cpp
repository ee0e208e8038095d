#include "autosynth/baselines.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>

namespace autosynth {

IndexResult mean_index(const NormalizedMatrix& R) {
    return make_index_result(Method::Mean, R.values.rowwise().mean());
}

IndexResult ampi_index(const NormalizedMatrix& R, AmpiSign sign) {
    const Eigen::Index n = R.values.rows();
    const Eigen::Index p = R.values.cols();
    Eigen::VectorXd values(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = R.values.row(i).mean();
        if (mu == 0.0)
            throw NumericError("AMPI undefined for unit at row " + std::to_string(i) +
                               ": zero row mean");
        double ss = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double d = R.values(i, j) - mu;
            ss += d * d;
        }
        const double sigma = std::sqrt(ss / static_cast<double>(p));
        const double cv = sigma / mu;
        values[i] = sign == AmpiSign::Plus ? mu + sigma * cv : mu - sigma * cv;
    }
    return make_index_result(Method::AMPI, values);
}

std::pair<IndexResult, PcaModel> pca_index(const NormalizedMatrix& R) {
    const Eigen::Index n = R.values.rows();
    if (n < 2)
        throw ValidationError("PCA needs at least 2 units");

    PcaModel model;
    model.center = R.values.colwise().mean().transpose();
    Eigen::MatrixXd centered = R.values.rowwise() - model.center.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double total = sv.array().square().sum();
    if (total <= 0.0)
        throw NumericError("PCA undefined: matrix has zero total variance");

    model.component = svd.matrixV().col(0);
    model.explained_variance_ratio = sv[0] * sv[0] / total;

    Eigen::VectorXd scores = centered * model.component;
    const IndexResult compass = ampi_index(R, AmpiSign::Plus);
    AlignedIndex aligned = align_polarity(rescale_to_scale(scores), compass);
    if (aligned.flipped) model.component = -model.component;

    IndexResult index = make_index_result(Method::PCA, std::move(aligned.values));
    index.polarity_flipped = aligned.flipped;
    return {std::move(index), std::move(model)};
}

namespace {

NormalizedMatrix submatrix(const NormalizedMatrix& R, const std::vector<Eigen::Index>& cols) {
    NormalizedMatrix out;
    out.polarity_applied = R.polarity_applied;
    out.goalposts.source = R.goalposts.source;
    out.values.resize(R.values.rows(), static_cast<Eigen::Index>(cols.size()));
    out.goalposts.lo.resize(static_cast<Eigen::Index>(cols.size()));
    out.goalposts.hi.resize(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.values.col(static_cast<Eigen::Index>(k)) = R.values.col(cols[k]);
        out.goalposts.lo[static_cast<Eigen::Index>(k)] = R.goalposts.lo[cols[k]];
        out.goalposts.hi[static_cast<Eigen::Index>(k)] = R.goalposts.hi[cols[k]];
    }
    return out;
}

IndexResult apply_method(const NormalizedMatrix& R, Method method,
                         const HierarchicalOptions& options) {
    switch (method) {
    case Method::Mean:
        return mean_index(R);
    case Method::AMPI:
        return ampi_index(R, options.ampi_sign);
    case Method::PCA:
        return pca_index(R).first;
    case Method::AutoSynth: {
        const IndexResult compass = ampi_index(R, options.ampi_sign);
        return autosynth_index(R.values, options.autosynth, options.autosynth_replications,
                               compass, options.threads)
            .index;
    }
    }
    throw ValidationError("unknown aggregation method");
}

}  // namespace

HierarchicalResult hierarchical_index(const IndicatorDataset& dataset, Method method,
                                      const HierarchicalOptions& options) {
    // Group columns by domain, preserving order of first appearance.
    std::vector<std::string> domains;
    std::vector<std::vector<Eigen::Index>> groups;
    for (Eigen::Index j = 0; j < dataset.n_indicators(); ++j) {
        const auto& ind = dataset.indicators[static_cast<std::size_t>(j)];
        if (ind.domain.empty())
            throw ValidationError("indicator '" + ind.name +
                                  "' has no domain label; hierarchical aggregation "
                                  "requires one per indicator");
        auto it = std::find(domains.begin(), domains.end(), ind.domain);
        if (it == domains.end()) {
            domains.push_back(ind.domain);
            groups.emplace_back();
            it = domains.end() - 1;
        }
        groups[static_cast<std::size_t>(it - domains.begin())].push_back(j);
    }
    if (domains.size() < 2)
        throw ValidationError("hierarchical aggregation needs at least 2 domains, got " +
                              std::to_string(domains.size()));

    const NormalizedMatrix R = normalize(dataset);

    HierarchicalResult result;
    result.domains = domains;
    Eigen::MatrixXd domain_values(R.values.rows(), static_cast<Eigen::Index>(domains.size()));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        IndexResult idx;
        if (groups[g].size() == 1) {
            // single-indicator domain: its index is the normalized column
            idx = make_index_result(method, R.values.col(groups[g][0]));
        } else {
            idx = apply_method(submatrix(R, groups[g]), method, options);
        }
        domain_values.col(static_cast<Eigen::Index>(g)) = idx.values;
        result.domain_indices.push_back(std::move(idx));
    }

    // Phase 2: treat the per-domain indices as a fresh dataset, renormalize
    // with observed goalposts, aggregate once more.
    NormalizedMatrix second;
    second.polarity_applied = true;
    second.goalposts.source = GoalpostSource::Observed;
    second.goalposts.lo.resize(static_cast<Eigen::Index>(domains.size()));
    second.goalposts.hi.resize(static_cast<Eigen::Index>(domains.size()));
    second.values.resize(domain_values.rows(), domain_values.cols());
    for (Eigen::Index j = 0; j < domain_values.cols(); ++j) {
        second.goalposts.lo[j] = domain_values.col(j).minCoeff();
        second.goalposts.hi[j] = domain_values.col(j).maxCoeff();
        if (!(second.goalposts.hi[j] > second.goalposts.lo[j]))
            throw NumericError("domain index '" + domains[static_cast<std::size_t>(j)] +
                               "' is constant; cannot renormalize");
        second.values.col(j) = rescale_to_scale(domain_values.col(j));
    }
    result.final_index = apply_method(second, method, options);
    return result;
}

}  // namespace autosynth
