#include "autosynth/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace autosynth {

std::vector<double> average_ranks(const Eigen::VectorXd& values) {
    const auto n = static_cast<std::size_t>(values.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[static_cast<Eigen::Index>(a)] < values[static_cast<Eigen::Index>(b)];
    });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               values[static_cast<Eigen::Index>(order[j + 1])] ==
                   values[static_cast<Eigen::Index>(order[i])])
            ++j;
        // positions i..j (0-based) share the average of ranks i+1..j+1
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size())
        throw ValidationError("spearman: vectors differ in length");
    if (a.size() < 2)
        throw ValidationError("spearman: need at least 2 observations");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const auto n = ra.size();

    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += ra[i];
        mean_b += rb[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = ra[i] - mean_a;
        const double db = rb[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 && var_b == 0.0) return 1.0;
    if (var_a == 0.0 || var_b == 0.0) return 0.0;
    return cov / std::sqrt(var_a * var_b);
}

namespace {

// Shared pair loop for both stress flavors: coords supplies the per-unit
// location in the reference space, proj the 1-d stand-in.
double stress_from_pairs(const Eigen::MatrixXd& coords, const Eigen::VectorXd& proj) {
    const Eigen::Index n = coords.rows();
    if (n < 2)
        throw ValidationError("stress needs at least 2 units");
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (coords.row(i) - coords.row(j)).norm();
            const double dt = std::abs(proj[i] - proj[j]);
            num += (d - dt) * (d - dt);
            den += d * d;
        }
    }
    if (den == 0.0)
        throw NumericError("stress undefined: all unit rows are identical");
    return std::sqrt(num / den);
}

}  // namespace

double stress(const NormalizedMatrix& R, const Eigen::VectorXd& index_values) {
    if (index_values.size() != R.values.rows())
        throw ValidationError("stress: index length does not match unit count");
    return stress_from_pairs(R.values, index_values);
}

double stress(const NormalizedMatrix& R, const IndexResult& index) {
    return stress(R, index.values);
}

double rank_stress(const NormalizedMatrix& R, const Eigen::VectorXd& index_values) {
    if (index_values.size() != R.values.rows())
        throw ValidationError("rank stress: index length does not match unit count");
    const Eigen::Index n = R.values.rows();
    const Eigen::VectorXd row_means = R.values.rowwise().mean();
    const auto mean_ranks = average_ranks(row_means);
    const auto index_ranks = average_ranks(index_values);

    Eigen::MatrixXd coords(n, 1);
    Eigen::VectorXd proj(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        coords(i, 0) = mean_ranks[static_cast<std::size_t>(i)];
        proj[i] = index_ranks[static_cast<std::size_t>(i)];
    }
    return stress_from_pairs(coords, proj);
}

double rank_stress(const NormalizedMatrix& R, const IndexResult& index) {
    return rank_stress(R, index.values);
}

CompareReport compare_methods(const NormalizedMatrix& R,
                              const std::vector<IndexResult>& results) {
    const Eigen::Index n = R.values.rows();
    for (const auto& res : results)
        if (res.values.size() != n)
            throw ValidationError("compare_methods: index '" + method_name(res.method) +
                                  "' does not cover the same units as the matrix");

    CompareReport report;
    const auto k = results.size();
    report.reports.reserve(k);
    for (const auto& res : results) {
        StressReport sr;
        sr.method = res.method;
        sr.stress = stress(R, res);
        sr.rank_stress = rank_stress(R, res);
        sr.n_units = static_cast<int>(n);
        report.reports.push_back(sr);
    }
    report.spearman.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            const double rho = a == b ? 1.0 : spearman(results[a].values, results[b].values);
            report.spearman(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rho;
            report.spearman(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = rho;
        }
    }
    return report;
}

}  // namespace autosynth
