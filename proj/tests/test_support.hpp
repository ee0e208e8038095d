// Shared fixtures for the test suites.
#pragma once

#include "autosynth/dataset.hpp"
#include "autosynth/normalize.hpp"
#include "autosynth/types.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testsup {

// A NormalizedMatrix wrapper around an arbitrary value matrix, with
// goalposts recorded from the columns.
inline autosynth::NormalizedMatrix wrap_normalized(Eigen::MatrixXd values) {
    autosynth::NormalizedMatrix out;
    const Eigen::Index p = values.cols();
    out.goalposts.lo.resize(p);
    out.goalposts.hi.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        out.goalposts.lo[j] = values.col(j).minCoeff();
        out.goalposts.hi[j] = values.col(j).maxCoeff();
    }
    out.values = std::move(values);
    out.polarity_applied = true;
    return out;
}

// Random matrix with entries uniform in [70, 130].
inline Eigen::MatrixXd random_scale_matrix(Eigen::Index n, Eigen::Index p,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(70.0, 130.0);
    Eigen::MatrixXd m(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = dist(rng);
    return m;
}

// Single-factor data: X = outer(u, loadings) + noise, column-normalized to
// [70, 130]. loadings are positive so higher u means uniformly higher rows.
// snr is the ratio of per-column factor sd to noise sd.
inline autosynth::NormalizedMatrix single_factor_matrix(Eigen::Index n, Eigen::Index p,
                                                        double snr, std::uint64_t seed,
                                                        Eigen::VectorXd* factor = nullptr) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> load(0.5, 1.5);
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = z(rng);
    Eigen::VectorXd v(p);
    for (Eigen::Index j = 0; j < p; ++j) v[j] = load(rng);
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            x(i, j) = u[i] * v[j] + (v[j] / snr) * z(rng);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double lo = x.col(j).minCoeff();
        const double hi = x.col(j).maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i)
            x(i, j) = autosynth::rescale_value(x(i, j), lo, hi);
    }
    if (factor) *factor = u;
    return wrap_normalized(std::move(x));
}

// A 74-unit, 13-indicator dataset in the shape of a municipal vulnerability
// table: three domains, mixed polarities, one dominant latent gradient so
// the most-exposed units form a stable set.
inline autosynth::IndicatorDataset municipal_fixture(std::uint64_t seed = 4242) {
    const Eigen::Index n = 74;
    const Eigen::Index p = 13;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> scale(1.0, 20.0);
    std::uniform_real_distribution<double> offset(-30.0, 60.0);

    Eigen::VectorXd gradient(n);
    for (Eigen::Index i = 0; i < n; ++i) gradient[i] = z(rng);

    autosynth::IndicatorDataset ds;
    ds.values.resize(n, p);
    const char* domains[3] = {"demography", "social", "economic"};
    const int domain_sizes[3] = {3, 6, 4};
    Eigen::Index j = 0;
    for (int d = 0; d < 3; ++d) {
        for (int k = 0; k < domain_sizes[d]; ++k, ++j) {
            autosynth::IndicatorMeta meta;
            meta.name = "ind" + std::to_string(j + 1);
            meta.domain = domains[d];
            // a few indicators point against the phenomenon
            meta.polarity = (j == 7 || j == 11) ? autosynth::Polarity::Negative
                                                : autosynth::Polarity::Positive;
            meta.weight = 1.0;
            ds.indicators.push_back(meta);

            const double s = scale(rng);
            const double o = offset(rng);
            const double sign = meta.polarity == autosynth::Polarity::Negative ? -1.0 : 1.0;
            for (Eigen::Index i = 0; i < n; ++i)
                ds.values(i, j) = o + s * (sign * gradient[i] + 0.35 * z(rng));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) ds.units.push_back("area" + std::to_string(i + 1));
    return autosynth::validate_weights(std::move(ds));
}

// Unique temp directory under the system temp root; removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            auto candidate = base / (tag + "-" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directories(candidate, ec)) {
                path_ = candidate;
                break;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    out << contents;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testsup
