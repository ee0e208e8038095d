#include "autosynth/simulation.hpp"

#include "autosynth/dataset.hpp"
#include "autosynth/normalize.hpp"

#include <doctest.h>

#include <cmath>

using namespace autosynth;

namespace {

Eigen::MatrixXd column_correlations(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::VectorXd inv_sd = cov.diagonal().array().sqrt().inverse();
    return inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
}

}  // namespace

TEST_CASE("iid draws keep pairwise correlations near zero at n = 1000") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        const auto ds = generate({DgpKind::IidNormal, 14, 1000, seed});
        REQUIRE(ds.n_units() == 1000);
        REQUIRE(ds.n_indicators() == 14);
        const auto corr = column_correlations(ds.values);
        for (int i = 0; i < 14; ++i)
            for (int j = i + 1; j < 14; ++j)
                CHECK(std::abs(corr(i, j)) <= 0.15);
    }
}

TEST_CASE("the correlation-matrix generator spans a wide range and stays PD") {
    for (std::uint64_t seed : {10ULL, 20ULL, 30ULL}) {
        const auto C = random_correlation(14, seed);
        REQUIRE(C.rows() == 14);
        for (int i = 0; i < 14; ++i) CHECK(C(i, i) == doctest::Approx(1.0).epsilon(1e-12));
        double lo = 1.0, hi = -1.0;
        for (int i = 0; i < 14; ++i)
            for (int j = i + 1; j < 14; ++j) {
                lo = std::min(lo, C(i, j));
                hi = std::max(hi, C(i, j));
            }
        CHECK(lo < -0.5);
        CHECK(hi > 0.5);
        Eigen::LLT<Eigen::MatrixXd> llt(C);
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("correlated-normal draws match their target correlations at n = 1000") {
    const DgpSpec spec{DgpKind::CorrelatedNormal, 14, 1000, 99};
    const auto ds = generate(spec);
    const auto achieved = column_correlations(ds.values);
    const auto target = target_correlation(spec);

    double lo = 1.0, hi = -1.0;
    for (int i = 0; i < 14; ++i)
        for (int j = i + 1; j < 14; ++j) {
            CHECK(std::abs(achieved(i, j) - target(i, j)) <= 0.1);
            lo = std::min(lo, achieved(i, j));
            hi = std::max(hi, achieved(i, j));
        }
    // the achieved extremes keep the wide-range property
    CHECK(lo < -0.5);
    CHECK(hi > 0.5);
}

TEST_CASE("mixed draws respect the marginal supports") {
    const auto ds = generate({DgpKind::CorrelatedMixed, 14, 400, 7});
    // column order cycles through the marginal list; columns 4 and 13 are
    // Poisson (0-based: 3 and 12), columns 5 and 14 exponential
    for (int col : {3, 12}) {
        for (Eigen::Index i = 0; i < ds.n_units(); ++i) {
            const double v = ds.values(i, col);
            CHECK(v >= 0.0);
            CHECK(v == std::floor(v));
        }
    }
    for (int col : {4, 13}) {
        for (Eigen::Index i = 0; i < ds.n_units(); ++i)
            CHECK(ds.values(i, col) > 0.0);
    }
    // chi-squared columns are positive as well
    for (int col : {2, 11}) {
        for (Eigen::Index i = 0; i < ds.n_units(); ++i)
            CHECK(ds.values(i, col) > 0.0);
    }
}

TEST_CASE("generated datasets always pass validation") {
    for (auto kind : {DgpKind::IidNormal, DgpKind::CorrelatedNormal, DgpKind::CorrelatedMixed}) {
        for (std::uint64_t seed : {100ULL, 200ULL}) {
            const auto ds = generate({kind, 14, 50, seed});
            CHECK_NOTHROW(validate_dataset(ds));
        }
    }
}

TEST_CASE("generation is deterministic in the spec seed") {
    const DgpSpec spec{DgpKind::CorrelatedMixed, 14, 60, 1234};
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK(a.values == b.values);
    CHECK(a.units == b.units);
}

TEST_CASE("normalization accepts every DGP output") {
    for (auto kind : {DgpKind::IidNormal, DgpKind::CorrelatedNormal, DgpKind::CorrelatedMixed}) {
        const auto ds = generate({kind, 14, 80, 31});
        const auto R = normalize(ds);
        for (int j = 0; j < 14; ++j) {
            CHECK(R.values.col(j).minCoeff() == doctest::Approx(70.0));
            CHECK(R.values.col(j).maxCoeff() == doctest::Approx(130.0));
        }
    }
}

TEST_CASE("run_study bookkeeping: two replications of the mean method") {
    std::vector<DgpSpec> dgps = {{DgpKind::IidNormal, 14, 50, 0}};
    TrainConfig cfg;
    StudyOptions opts;
    opts.master_seed = 5;
    const auto report = run_study(dgps, {Method::Mean}, 2, cfg, opts);
    REQUIRE(report.cells.size() == 1);
    const auto& cell = report.cell(DgpKind::IidNormal, 50, Method::Mean);
    CHECK(cell.stress.size() == 2);
    CHECK(cell.rank_stress.size() == 2);
    CHECK(cell.failures == 0);
    for (double s : cell.stress) CHECK(s >= 0.0);
}

TEST_CASE("run_study is deterministic and thread-count independent") {
    std::vector<DgpSpec> dgps = {{DgpKind::CorrelatedNormal, 6, 40, 0}};
    TrainConfig cfg;
    cfg.max_epochs = 120;
    StudyOptions a_opts;
    a_opts.master_seed = 11;
    a_opts.autosynth_replications = 2;
    a_opts.threads = 1;
    auto b_opts = a_opts;
    b_opts.threads = 2;

    const auto a = run_study(dgps, {Method::Mean, Method::AutoSynth}, 4, cfg, a_opts);
    const auto b = run_study(dgps, {Method::Mean, Method::AutoSynth}, 4, cfg, b_opts);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t c = 0; c < a.cells.size(); ++c) {
        CHECK(a.cells[c].stress == b.cells[c].stress);
        CHECK(a.cells[c].rank_stress == b.cells[c].rank_stress);
    }
}

TEST_CASE("run_study covers the methods-by-cells grid") {
    std::vector<DgpSpec> dgps = {{DgpKind::IidNormal, 5, 30, 0},
                                 {DgpKind::CorrelatedNormal, 5, 30, 0}};
    TrainConfig cfg;
    StudyOptions opts;
    opts.master_seed = 21;
    const auto report = run_study(dgps, {Method::Mean, Method::AMPI, Method::PCA}, 3, cfg, opts);
    CHECK(report.cells.size() == 6);
    CHECK_NOTHROW(report.cell(DgpKind::CorrelatedNormal, 30, Method::PCA));
    CHECK_THROWS_AS(report.cell(DgpKind::CorrelatedMixed, 30, Method::PCA), ValidationError);
}

TEST_CASE("invalid DGP names and specs are rejected") {
    CHECK_THROWS_AS(dgp_from_name("zeta"), ValidationError);
    CHECK(dgp_from_name("mixed") == DgpKind::CorrelatedMixed);
    CHECK(dgp_name(DgpKind::CorrelatedNormal) == "corr");
    CHECK_THROWS_AS(generate({DgpKind::IidNormal, 1, 50, 0}), ValidationError);
    CHECK_THROWS_AS(generate({DgpKind::IidNormal, 14, 5, 0}), ValidationError);
}
