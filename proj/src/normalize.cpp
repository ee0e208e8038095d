#include "autosynth/normalize.hpp"

namespace autosynth {

Eigen::VectorXd rescale_to_scale(const Eigen::VectorXd& v) {
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (!(hi > lo))
        throw NumericError("cannot rescale a constant vector to [70, 130]");
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[i] = rescale_value(v[i], lo, hi);
    return out;
}

NormalizedMatrix normalize(const IndicatorDataset& dataset,
                           const std::optional<Goalposts>& goalposts) {
    const Eigen::Index n = dataset.values.rows();
    const Eigen::Index p = dataset.values.cols();

    NormalizedMatrix out;
    if (goalposts) {
        out.goalposts = *goalposts;
        out.goalposts.source = GoalpostSource::Supplied;
        if (out.goalposts.lo.size() != p || out.goalposts.hi.size() != p)
            throw ValidationError("supplied goalposts must cover every indicator");
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!(out.goalposts.hi[j] > out.goalposts.lo[j]))
                throw ValidationError("goalposts for indicator '" +
                                      dataset.indicators[static_cast<std::size_t>(j)].name +
                                      "' have hi <= lo");
            const double cmin = dataset.values.col(j).minCoeff();
            const double cmax = dataset.values.col(j).maxCoeff();
            if (cmin < out.goalposts.lo[j] || cmax > out.goalposts.hi[j])
                out.warnings.push_back("indicator '" +
                                       dataset.indicators[static_cast<std::size_t>(j)].name +
                                       "' has observed values outside the supplied goalposts; "
                                       "normalized values will leave [70, 130]");
        }
    } else {
        out.goalposts.source = GoalpostSource::Observed;
        out.goalposts.lo.resize(p);
        out.goalposts.hi.resize(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            out.goalposts.lo[j] = dataset.values.col(j).minCoeff();
            out.goalposts.hi[j] = dataset.values.col(j).maxCoeff();
            if (!(out.goalposts.hi[j] > out.goalposts.lo[j]))
                throw ValidationError("indicator '" +
                                      dataset.indicators[static_cast<std::size_t>(j)].name +
                                      "' is constant (min equals max)");
        }
    }

    out.values.resize(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double lo = out.goalposts.lo[j];
        const double hi = out.goalposts.hi[j];
        const bool negative =
            dataset.indicators[static_cast<std::size_t>(j)].polarity == Polarity::Negative;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = rescale_value(dataset.values(i, j), lo, hi);
            out.values(i, j) = negative ? 200.0 - r : r;
        }
    }
    out.polarity_applied = true;
    return out;
}

}  // namespace autosynth
