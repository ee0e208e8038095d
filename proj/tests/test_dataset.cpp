#include "autosynth/dataset.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace autosynth;
using testsup::TempDir;

namespace {

std::string make_csv(int n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 50.0);
    std::string csv = "unit_id";
    for (int j = 0; j < p; ++j) csv += ",ind" + std::to_string(j + 1);
    csv += "\n";
    for (int i = 0; i < n; ++i) {
        csv += "u" + std::to_string(i + 1);
        for (int j = 0; j < p; ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.6f", dist(rng));
            csv += buf;
        }
        csv += "\n";
    }
    return csv;
}

}  // namespace

TEST_CASE("load_dataset reads a municipal-scale CSV with uniform weights") {
    TempDir dir("load-florence");
    testsup::write_file(dir.file("data.csv"), make_csv(74, 13, 7));
    std::string meta = "{";
    for (int j = 0; j < 13; ++j) {
        if (j) meta += ",";
        meta += "\"ind" + std::to_string(j + 1) +
                "\":{\"polarity\":\"positive\",\"domain\":\"d\",\"weight\":1.0}";
    }
    meta += "}";
    testsup::write_file(dir.file("meta.json"), meta);

    const auto ds = load_dataset(dir.file("data.csv"), dir.file("meta.json"));
    CHECK(ds.n_units() == 74);
    CHECK(ds.n_indicators() == 13);
    for (const auto& ind : ds.indicators)
        CHECK(ind.weight == doctest::Approx(1.0 / 13.0).epsilon(1e-15));
}

TEST_CASE("load_dataset handles a minimal 2x2 input") {
    TempDir dir("load-mini");
    testsup::write_file(dir.file("d.csv"), "unit_id,a,b\nu1,1,4\nu2,2,3\n");
    const auto ds = load_dataset(dir.file("d.csv"));
    CHECK(ds.n_units() == 2);
    CHECK(ds.n_indicators() == 2);
    CHECK(ds.values(0, 1) == 4.0);
    // defaults: positive polarity, empty domain, uniform weight
    CHECK(ds.indicators[0].polarity == Polarity::Positive);
    CHECK(ds.indicators[0].domain.empty());
    CHECK(ds.indicators[0].weight == doctest::Approx(0.5));
}

TEST_CASE("constant columns are rejected by name") {
    TempDir dir("load-const");
    testsup::write_file(dir.file("d.csv"), "unit_id,a,b\nu1,1,5.0\nu2,2,5.0\nu3,3,5.0\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("d.csv")),
                         doctest::Contains("'b'"), ValidationError);
}

TEST_CASE("duplicate names are rejected") {
    TempDir dir("load-dup");
    testsup::write_file(dir.file("du.csv"), "unit_id,a,b\nu1,1,2\nu1,3,4\n");
    CHECK_THROWS_AS(load_dataset(dir.file("du.csv")), ValidationError);
    testsup::write_file(dir.file("di.csv"), "unit_id,a,a\nu1,1,2\nu2,3,4\n");
    CHECK_THROWS_AS(load_dataset(dir.file("di.csv")), ValidationError);
}

TEST_CASE("malformed rows raise parse errors naming the row") {
    TempDir dir("load-bad");
    testsup::write_file(dir.file("d.csv"), "unit_id,a,b\nu1,1,2\nu2,3\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("d.csv")),
                         doctest::Contains("row 3"), ParseError);
    testsup::write_file(dir.file("e.csv"), "unit_id,a,b\nu1,1,2\nu2,3,zebra\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("e.csv")),
                         doctest::Contains("row 3"), ParseError);
}

TEST_CASE("non-finite cells are rejected with coordinates, or imputed on request") {
    TempDir dir("load-nan");
    testsup::write_file(dir.file("d.csv"),
                        "unit_id,a,b\nu1,1,10\nu2,,20\nu3,3,30\nu4,4,40\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("d.csv")),
                         doctest::Contains("'u2'"), ValidationError);

    LoadOptions opts;
    opts.impute_missing = true;
    const auto ds = load_dataset(dir.file("d.csv"), "", opts);
    // median of {1, 3, 4}
    CHECK(ds.values(1, 0) == 3.0);
}

TEST_CASE("metadata file is applied per indicator name") {
    TempDir dir("load-meta");
    testsup::write_file(dir.file("d.csv"), "unit_id,a,b\nu1,1,2\nu2,3,4\n");
    testsup::write_file(dir.file("m.json"),
                        R"({"a":{"polarity":"negative","domain":"econ","weight":3.0}})");
    const auto ds = load_dataset(dir.file("d.csv"), dir.file("m.json"));
    CHECK(ds.indicators[0].polarity == Polarity::Negative);
    CHECK(ds.indicators[0].domain == "econ");
    // weights 3.0 and the 1/2 default renormalize to sum 1
    CHECK(ds.indicators[0].weight == doctest::Approx(3.0 / 3.5));
    CHECK(ds.indicators[1].weight == doctest::Approx(0.5 / 3.5));
    CHECK(ds.indicators[1].polarity == Polarity::Positive);
}

TEST_CASE("validate_weights renormalizes and is idempotent") {
    IndicatorDataset ds;
    ds.units = {"u1", "u2"};
    ds.values.resize(2, 2);
    ds.values << 1, 2, 3, 4;
    ds.indicators = {{"a", "", Polarity::Positive, 2.0}, {"b", "", Polarity::Positive, 0.0}};

    const auto once = validate_weights(ds);
    CHECK(once.indicators[0].weight == 1.0);
    CHECK(once.indicators[1].weight == 0.0);
    const auto twice = validate_weights(once);
    CHECK(twice.indicators[0].weight == once.indicators[0].weight);
    CHECK(twice.indicators[1].weight == once.indicators[1].weight);

    SUBCASE("14 uniform weights become 1/14") {
        IndicatorDataset wide;
        wide.units = {"u1", "u2"};
        wide.values.resize(2, 14);
        for (int j = 0; j < 14; ++j) {
            wide.values(0, j) = j;
            wide.values(1, j) = j + 1;
            wide.indicators.push_back({"i" + std::to_string(j), "", Polarity::Positive, 1.0});
        }
        const auto out = validate_weights(wide);
        for (const auto& ind : out.indicators)
            CHECK(ind.weight == doctest::Approx(1.0 / 14.0).epsilon(1e-15));
    }

    SUBCASE("all-zero weights are rejected") {
        ds.indicators[0].weight = 0.0;
        CHECK_THROWS_AS(validate_weights(ds), ValidationError);
    }
}

TEST_CASE("dataset round-trips through CSV + metadata bit-exactly") {
    auto ds = testsup::municipal_fixture(99);
    TempDir dir("roundtrip");
    save_dataset(ds, dir.file("d.csv"), dir.file("m.json"));
    const auto back = load_dataset(dir.file("d.csv"), dir.file("m.json"));

    REQUIRE(back.n_units() == ds.n_units());
    REQUIRE(back.n_indicators() == ds.n_indicators());
    CHECK(back.units == ds.units);
    for (std::size_t j = 0; j < ds.indicators.size(); ++j) {
        CHECK(back.indicators[j].name == ds.indicators[j].name);
        CHECK(back.indicators[j].domain == ds.indicators[j].domain);
        CHECK(back.indicators[j].polarity == ds.indicators[j].polarity);
        CHECK(back.indicators[j].weight == ds.indicators[j].weight);
    }
    for (Eigen::Index i = 0; i < ds.values.rows(); ++i)
        for (Eigen::Index j = 0; j < ds.values.cols(); ++j)
            CHECK(back.values(i, j) == ds.values(i, j));
}

TEST_CASE("quoted unit names with commas survive the round trip") {
    TempDir dir("quoted");
    testsup::write_file(dir.file("d.csv"),
                        "unit_id,a,b\n\"County, East\",1,2\nu2,3,4\n");
    const auto ds = load_dataset(dir.file("d.csv"));
    CHECK(ds.units[0] == "County, East");
    save_dataset(ds, dir.file("out.csv"), dir.file("out.json"));
    const auto back = load_dataset(dir.file("out.csv"), dir.file("out.json"));
    CHECK(back.units[0] == "County, East");
}

TEST_CASE("tiny datasets are rejected") {
    IndicatorDataset ds;
    ds.units = {"u1"};
    ds.values.resize(1, 2);
    ds.values << 1, 2;
    ds.indicators = {{"a", "", Polarity::Positive, 0.5}, {"b", "", Polarity::Positive, 0.5}};
    CHECK_THROWS_AS(validate_dataset(ds), ValidationError);
}
