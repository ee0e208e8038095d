#include "autosynth/simulation.hpp"

#include "autosynth/baselines.hpp"
#include "autosynth/dataset.hpp"
#include "autosynth/evaluation.hpp"
#include "autosynth/normalize.hpp"

#include <Eigen/Cholesky>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

namespace autosynth {

std::string dgp_name(DgpKind kind) {
    switch (kind) {
    case DgpKind::IidNormal: return "iid";
    case DgpKind::CorrelatedNormal: return "corr";
    case DgpKind::CorrelatedMixed: return "mixed";
    }
    return "unknown";
}

DgpKind dgp_from_name(const std::string& name) {
    if (name == "iid") return DgpKind::IidNormal;
    if (name == "corr") return DgpKind::CorrelatedNormal;
    if (name == "mixed") return DgpKind::CorrelatedMixed;
    throw ValidationError("unknown DGP: " + name + " (expected iid, corr or mixed)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr double kStdNormalScale = 0.7071067811865475244;  // 1/sqrt(2)

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kStdNormalScale); }

// Marginal families available to the mixed process, in the order they are
// assigned to columns (cycling when p exceeds the list length).
enum class Marginal { Uniform1, Uniform2, ChiSquared, Poisson, Exponential, StudentT,
                      Normal1, Normal2, Normal3 };

constexpr int kMarginalCycle = 9;

Marginal marginal_for_column(int j) { return static_cast<Marginal>(j % kMarginalCycle); }

struct MarginalParams {
    Marginal kind;
    double a = 0.0;  // uniform lower / normal mean
    double b = 1.0;  // uniform width / normal sd
    int df = 1;      // chi-squared or t degrees of freedom
    double rate = 1.0;
    double lambda = 1.0;
};

MarginalParams draw_marginal_params(Marginal kind, std::mt19937_64& rng) {
    MarginalParams mp;
    mp.kind = kind;
    switch (kind) {
    case Marginal::Uniform1:
    case Marginal::Uniform2: {
        std::uniform_real_distribution<double> lo(-10.0, 10.0);
        std::uniform_real_distribution<double> width(1.0, 10.0);
        mp.a = lo(rng);
        mp.b = width(rng);
        break;
    }
    case Marginal::ChiSquared: {
        std::uniform_int_distribution<int> df(2, 10);
        mp.df = df(rng);
        break;
    }
    case Marginal::Poisson: {
        std::uniform_real_distribution<double> lambda(1.0, 20.0);
        mp.lambda = lambda(rng);
        break;
    }
    case Marginal::Exponential: {
        std::uniform_real_distribution<double> rate(0.2, 2.0);
        mp.rate = rate(rng);
        break;
    }
    case Marginal::StudentT: {
        std::uniform_int_distribution<int> df(3, 15);
        mp.df = df(rng);
        break;
    }
    case Marginal::Normal1:
    case Marginal::Normal2:
    case Marginal::Normal3: {
        std::uniform_real_distribution<double> mean(-10.0, 10.0);
        std::uniform_real_distribution<double> sd(0.5, 5.0);
        mp.a = mean(rng);
        mp.b = sd(rng);
        break;
    }
    }
    return mp;
}

double marginal_quantile(const MarginalParams& mp, double u) {
    u = std::clamp(u, 1e-15, 1.0 - 1e-15);
    switch (mp.kind) {
    case Marginal::Uniform1:
    case Marginal::Uniform2:
        return mp.a + u * mp.b;
    case Marginal::ChiSquared:
        return boost::math::quantile(boost::math::chi_squared_distribution<double>(mp.df), u);
    case Marginal::Poisson:
        return boost::math::quantile(boost::math::poisson_distribution<double>(mp.lambda), u);
    case Marginal::Exponential:
        return boost::math::quantile(boost::math::exponential_distribution<double>(mp.rate), u);
    case Marginal::StudentT:
        return boost::math::quantile(boost::math::students_t_distribution<double>(mp.df), u);
    case Marginal::Normal1:
    case Marginal::Normal2:
    case Marginal::Normal3:
        return boost::math::quantile(boost::math::normal_distribution<double>(mp.a, mp.b), u);
    }
    throw NumericError("unknown marginal kind");
}

IndicatorDataset wrap_dataset(Eigen::MatrixXd values) {
    IndicatorDataset ds;
    const Eigen::Index n = values.rows();
    const Eigen::Index p = values.cols();
    ds.values = std::move(values);
    ds.units.reserve(static_cast<std::size_t>(n));
    char buf[24];
    for (Eigen::Index i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "u%04lld", static_cast<long long>(i + 1));
        ds.units.emplace_back(buf);
    }
    ds.indicators.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        IndicatorMeta meta;
        std::snprintf(buf, sizeof(buf), "v%02lld", static_cast<long long>(j + 1));
        meta.name = buf;
        meta.weight = 1.0 / static_cast<double>(p);
        ds.indicators.push_back(std::move(meta));
    }
    return ds;
}

Eigen::MatrixXd draw_once(const DgpSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = spec.n;
    const int p = spec.p;
    Eigen::MatrixXd X(n, p);

    switch (spec.kind) {
    case DgpKind::IidNormal: {
        std::uniform_real_distribution<double> mean(-10.0, 10.0);
        std::uniform_real_distribution<double> sd(0.5, 5.0);
        std::normal_distribution<double> z;
        std::vector<double> mu(static_cast<std::size_t>(p)), sig(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) {
            mu[static_cast<std::size_t>(j)] = mean(rng);
            sig[static_cast<std::size_t>(j)] = sd(rng);
        }
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < n; ++i)
                X(i, j) = mu[static_cast<std::size_t>(j)] +
                          sig[static_cast<std::size_t>(j)] * z(rng);
        break;
    }
    case DgpKind::CorrelatedNormal: {
        const Eigen::MatrixXd C = random_correlation(p, splitmix64(seed ^ 0xC0441u));
        const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(C).matrixL();
        std::uniform_real_distribution<double> mean(-10.0, 10.0);
        std::uniform_real_distribution<double> sd(0.5, 5.0);
        std::normal_distribution<double> z;
        Eigen::VectorXd mu(p), sig(p), g(p);
        for (int j = 0; j < p; ++j) {
            mu[j] = mean(rng);
            sig[j] = sd(rng);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) g[j] = z(rng);
            X.row(i) = (mu.array() + sig.array() * (L * g).array()).transpose();
        }
        break;
    }
    case DgpKind::CorrelatedMixed: {
        const Eigen::MatrixXd C = random_correlation(p, splitmix64(seed ^ 0x313Du));
        const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(C).matrixL();
        std::vector<MarginalParams> marginals;
        marginals.reserve(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j)
            marginals.push_back(draw_marginal_params(marginal_for_column(j), rng));
        std::normal_distribution<double> z;
        Eigen::VectorXd g(p);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) g[j] = z(rng);
            const Eigen::VectorXd corr = L * g;
            for (int j = 0; j < p; ++j)
                X(i, j) = marginal_quantile(marginals[static_cast<std::size_t>(j)],
                                            std_normal_cdf(corr[j]));
        }
        break;
    }
    }
    return X;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2) + b));
}

Eigen::MatrixXd target_correlation(const DgpSpec& spec) {
    switch (spec.kind) {
    case DgpKind::IidNormal:
        return Eigen::MatrixXd::Identity(spec.p, spec.p);
    case DgpKind::CorrelatedNormal:
        return random_correlation(spec.p, splitmix64(spec.seed ^ 0xC0441u));
    case DgpKind::CorrelatedMixed:
        return random_correlation(spec.p, splitmix64(spec.seed ^ 0x313Du));
    }
    throw ValidationError("unknown DGP kind");
}

Eigen::MatrixXd random_correlation(int p, std::uint64_t seed) {
    constexpr int kFactors = 3;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> jitter(0.05, 0.3);

    for (int attempt = 0; attempt < 100; ++attempt) {
        Eigen::MatrixXd A(p, kFactors);
        for (int i = 0; i < p; ++i)
            for (int k = 0; k < kFactors; ++k) A(i, k) = z(rng);
        Eigen::MatrixXd S = A * A.transpose();
        for (int i = 0; i < p; ++i) S(i, i) += jitter(rng);

        Eigen::VectorXd d = S.diagonal().array().sqrt().inverse();
        Eigen::MatrixXd C = d.asDiagonal() * S * d.asDiagonal();

        double lo = 1.0, hi = -1.0;
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) {
                lo = std::min(lo, C(i, j));
                hi = std::max(hi, C(i, j));
            }
        // require a wide spread so the sampled data reliably shows
        // correlations beyond +-0.5
        if (lo < -0.55 && hi > 0.55) {
            Eigen::LLT<Eigen::MatrixXd> llt(C);
            if (llt.info() == Eigen::Success) return C;
        }
    }
    throw NumericError("failed to generate a wide-range correlation matrix in 100 attempts");
}

IndicatorDataset generate(const DgpSpec& spec) {
    if (spec.p < 2)
        throw ValidationError("DGP needs p >= 2");
    if (spec.n < 10)
        throw ValidationError("DGP needs n >= 10");

    for (int attempt = 0; attempt < 100; ++attempt) {
        const std::uint64_t seed =
            attempt == 0 ? spec.seed : mix_seed(spec.seed, 0xD00DULL + static_cast<std::uint64_t>(attempt));
        IndicatorDataset ds = wrap_dataset(draw_once(spec, seed));
        try {
            return validate_dataset(std::move(ds));
        } catch (const ValidationError&) {
            // degenerate draw (constant column); redraw with a derived seed
        }
    }
    throw NumericError("DGP kept producing degenerate datasets after 100 attempts");
}

const SimulationCell& SimulationReport::cell(DgpKind kind, int n, Method method) const {
    for (const auto& c : cells)
        if (c.kind == kind && c.n == n && c.method == method) return c;
    throw ValidationError("no such simulation cell: " + dgp_name(kind) + "/n=" +
                          std::to_string(n) + "/" + method_name(method));
}

SimulationReport run_study(const std::vector<DgpSpec>& dgps,
                           const std::vector<Method>& methods, int replications,
                           const TrainConfig& autosynth_config,
                           const StudyOptions& options) {
    if (dgps.empty() || methods.empty())
        throw ValidationError("run_study needs at least one DGP and one method");
    if (replications < 1)
        throw ValidationError("run_study needs at least one replication");

    SimulationReport report;
    report.replications = replications;
    report.master_seed = options.master_seed;

    for (std::size_t cell_idx = 0; cell_idx < dgps.size(); ++cell_idx) {
        const DgpSpec& base = dgps[cell_idx];

        // slot per (method, replication); NaN marks a failure
        Eigen::MatrixXd stress_slots(static_cast<Eigen::Index>(methods.size()), replications);
        Eigen::MatrixXd rank_slots = stress_slots;
        stress_slots.setConstant(std::numeric_limits<double>::quiet_NaN());
        rank_slots.setConstant(std::numeric_limits<double>::quiet_NaN());

        std::atomic<int> next{0};
        std::exception_ptr fatal;
        std::mutex fatal_mutex;

        auto worker = [&]() {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= replications) return;
                try {
                    DgpSpec spec = base;
                    spec.seed = mix_seed(mix_seed(options.master_seed, cell_idx),
                                         static_cast<std::uint64_t>(r));
                    const IndicatorDataset ds = generate(spec);
                    const NormalizedMatrix R = normalize(ds);
                    IndexResult compass;
                    bool have_compass = false;
                    for (std::size_t m = 0; m < methods.size(); ++m) {
                        try {
                            IndexResult idx;
                            switch (methods[m]) {
                            case Method::Mean:
                                idx = mean_index(R);
                                break;
                            case Method::AMPI:
                                idx = ampi_index(R, options.ampi_sign);
                                break;
                            case Method::PCA:
                                idx = pca_index(R).first;
                                break;
                            case Method::AutoSynth: {
                                if (!have_compass) {
                                    compass = ampi_index(R, options.ampi_sign);
                                    have_compass = true;
                                }
                                TrainConfig cfg = autosynth_config;
                                cfg.seed = mix_seed(spec.seed, 0xAE5ULL);
                                idx = autosynth_index(R.values, cfg,
                                                      options.autosynth_replications, compass,
                                                      /*threads=*/1)
                                          .index;
                                break;
                            }
                            }
                            stress_slots(static_cast<Eigen::Index>(m), r) = stress(R, idx);
                            rank_slots(static_cast<Eigen::Index>(m), r) = rank_stress(R, idx);
                        } catch (const Error&) {
                            // failure recorded as NaN slot for this method
                        }
                    }
                } catch (const Error&) {
                    // generation/normalization failure: every method records a failure
                } catch (...) {
                    std::scoped_lock lock(fatal_mutex);
                    if (!fatal) fatal = std::current_exception();
                    return;
                }
            }
        };

        int n_threads = options.threads > 0
                            ? options.threads
                            : static_cast<int>(std::thread::hardware_concurrency());
        n_threads = std::clamp(n_threads, 1, replications);
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        if (fatal) std::rethrow_exception(fatal);

        for (std::size_t m = 0; m < methods.size(); ++m) {
            SimulationCell cell;
            cell.kind = base.kind;
            cell.n = base.n;
            cell.method = methods[m];
            for (int r = 0; r < replications; ++r) {
                const double s = stress_slots(static_cast<Eigen::Index>(m), r);
                if (std::isnan(s)) {
                    ++cell.failures;
                } else {
                    cell.stress.push_back(s);
                    cell.rank_stress.push_back(rank_slots(static_cast<Eigen::Index>(m), r));
                }
            }
            if (cell.failures * 20 > replications)
                throw NumericError("simulation cell " + dgp_name(cell.kind) + "/n=" +
                                   std::to_string(cell.n) + "/" + method_name(cell.method) +
                                   " exceeded the 5% failure budget (" +
                                   std::to_string(cell.failures) + " of " +
                                   std::to_string(replications) + ")");
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

}  // namespace autosynth
