// Command-line front end: normalize -> index -> compare -> simulate.
//
// Exit codes: 0 success, 2 user/input error, 3 numeric failure.
// Every run writes a manifest.json into the output directory with the
// resolved configuration and input digests, sufficient to reproduce the
// outputs byte for byte.

#include "autosynth/autoencoder.hpp"
#include "autosynth/baselines.hpp"
#include "autosynth/dataset.hpp"
#include "autosynth/evaluation.hpp"
#include "autosynth/normalize.hpp"
#include "autosynth/simulation.hpp"
#include "autosynth/types.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace autosynth;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out = ".";
    int threads = 0;
    bool quiet = false;
};

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof(buf));
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        char b[3];
        std::snprintf(b, sizeof(b), "%02x", digest[i]);
        hex += b;
    }
    return "sha256:" + hex;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path.string());
    out << text;
}

void write_json(const fs::path& path, const ordered_json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const GlobalOpts& g, ordered_json config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& warnings) {
    ordered_json doc;
    doc["command"] = command;
    doc["tool_version"] = kToolVersion;
    doc["seed"] = g.seed;
    doc["threads"] = g.threads;
    doc["config"] = std::move(config);
    ordered_json digests = ordered_json::object();
    for (const auto& path : inputs) digests[path] = sha256_file(path);
    doc["inputs"] = std::move(digests);
    doc["warnings"] = warnings;
    write_json(out_dir / "manifest.json", doc);
}

void write_index_csv(const fs::path& path, const std::vector<std::string>& units,
                     const IndexResult& index) {
    std::string out = "unit_id,value,rank\n";
    for (Eigen::Index i = 0; i < index.values.size(); ++i) {
        out += units[static_cast<std::size_t>(i)];
        out += ',';
        out += format17(index.values[i]);
        out += ',';
        out += std::to_string(index.ranks[static_cast<std::size_t>(i)]);
        out += '\n';
    }
    write_text(path, out);
}

// Reads unit ids + values from an index CSV (unit_id,value[,rank]).
std::pair<std::vector<std::string>, Eigen::VectorXd> read_index_csv(const std::string& path) {
    MatrixTable table = read_matrix_csv(path);
    if (table.columns.empty() || table.columns[0] != "value")
        throw ParseError("index file " + path + " must have columns unit_id,value[,rank]");
    return {std::move(table.units), Eigen::VectorXd(table.values.col(0))};
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw NumericError("quantile of empty vector");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return sorted_quantile(v, 0.5);
}

NormalizedMatrix wrap_matrix(Eigen::MatrixXd values) {
    NormalizedMatrix out;
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

void print_warnings(const std::vector<std::string>& warnings, bool quiet) {
    if (quiet) return;
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------
// normalize

struct NormalizeOpts {
    std::string data;
    std::string meta;
    std::string goalposts;
    bool impute = false;
};

int cmd_normalize(const GlobalOpts& g, const NormalizeOpts& o) {
    const fs::path out_dir(g.out);
    fs::create_directories(out_dir);

    std::vector<std::string> warnings;
    std::vector<std::string> inputs = {o.data};

    std::string meta_path = o.meta;
    if (!meta_path.empty() && !fs::exists(meta_path)) {
        warnings.push_back("metadata file '" + meta_path +
                           "' not found; defaults applied (positive polarity, uniform weights)");
        meta_path.clear();
    }
    if (!meta_path.empty()) inputs.push_back(meta_path);

    LoadOptions load;
    load.impute_missing = o.impute;
    const IndicatorDataset ds = load_dataset(o.data, meta_path, load);

    std::optional<Goalposts> gp;
    if (!o.goalposts.empty()) {
        inputs.push_back(o.goalposts);
        std::ifstream in(o.goalposts);
        if (!in) throw ParseError("cannot open goalposts file: " + o.goalposts);
        json doc;
        try {
            in >> doc;
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("goalposts file: ") + e.what());
        }
        Goalposts supplied;
        supplied.source = GoalpostSource::Supplied;
        supplied.lo.resize(ds.n_indicators());
        supplied.hi.resize(ds.n_indicators());
        for (Eigen::Index j = 0; j < ds.n_indicators(); ++j) {
            const auto& name = ds.indicators[static_cast<std::size_t>(j)].name;
            if (!doc.contains(name))
                throw ValidationError("goalposts file is missing indicator '" + name + "'");
            supplied.lo[j] = doc[name].at("lo").get<double>();
            supplied.hi[j] = doc[name].at("hi").get<double>();
        }
        gp = std::move(supplied);
    }

    const NormalizedMatrix R = normalize(ds, gp);
    warnings.insert(warnings.end(), R.warnings.begin(), R.warnings.end());
    print_warnings(warnings, g.quiet);

    MatrixTable table;
    table.units = ds.units;
    for (const auto& ind : ds.indicators) table.columns.push_back(ind.name);
    table.values = R.values;
    write_matrix_csv((out_dir / "normalized.csv").string(), table);

    ordered_json gp_doc;
    gp_doc["source"] = R.goalposts.source == GoalpostSource::Observed ? "observed" : "supplied";
    gp_doc["polarity_applied"] = R.polarity_applied;
    ordered_json per = ordered_json::object();
    for (Eigen::Index j = 0; j < ds.n_indicators(); ++j) {
        const auto& ind = ds.indicators[static_cast<std::size_t>(j)];
        per[ind.name] = {{"lo", R.goalposts.lo[j]},
                         {"hi", R.goalposts.hi[j]},
                         {"polarity", ind.polarity == Polarity::Positive ? "positive"
                                                                         : "negative"},
                         {"weight", ind.weight}};
    }
    gp_doc["indicators"] = std::move(per);
    write_json(out_dir / "goalposts.json", gp_doc);

    ordered_json config;
    config["data"] = o.data;
    config["meta"] = meta_path;
    config["goalposts"] = o.goalposts;
    config["impute"] = o.impute;
    write_manifest(out_dir, "normalize", g, std::move(config), inputs, warnings);

    if (!g.quiet)
        std::cout << "normalized " << ds.n_units() << " units x " << ds.n_indicators()
                  << " indicators -> " << (out_dir / "normalized.csv").string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// index

struct IndexOpts {
    std::string normalized;
    std::string data;
    std::string meta;
    bool auto_normalize = false;
    bool hierarchical = false;
    std::string method = "mean";
    std::string sign = "plus";
    int replications = 500;
    int hidden = 0;
    int epochs = 2000;
    double learning_rate = 1e-3;
    double tolerance = 1e-6;
    bool write_ensemble = false;
    bool impute = false;
};

ordered_json ensemble_quantiles_json(const std::vector<std::string>& units,
                                     const Eigen::MatrixXd& ensemble) {
    ordered_json rows = ordered_json::array();
    std::vector<double> row(static_cast<std::size_t>(ensemble.cols()));
    for (Eigen::Index i = 0; i < ensemble.rows(); ++i) {
        for (Eigen::Index c = 0; c < ensemble.cols(); ++c)
            row[static_cast<std::size_t>(c)] = ensemble(i, c);
        std::sort(row.begin(), row.end());
        rows.push_back({{"unit_id", units[static_cast<std::size_t>(i)]},
                        {"p05", sorted_quantile(row, 0.05)},
                        {"p25", sorted_quantile(row, 0.25)},
                        {"p50", sorted_quantile(row, 0.50)},
                        {"p75", sorted_quantile(row, 0.75)},
                        {"p95", sorted_quantile(row, 0.95)}});
    }
    return rows;
}

int cmd_index(const GlobalOpts& g, const IndexOpts& o) {
    const fs::path out_dir(g.out);
    fs::create_directories(out_dir);

    std::vector<std::string> warnings;
    std::vector<std::string> inputs;

    const Method method = method_from_name(o.method);
    const AmpiSign sign = o.sign == "minus" ? AmpiSign::Minus : AmpiSign::Plus;

    TrainConfig cfg;
    cfg.hidden_width = o.hidden;
    cfg.max_epochs = o.epochs;
    cfg.learning_rate = o.learning_rate;
    cfg.tolerance = o.tolerance;
    cfg.seed = g.seed;

    std::vector<std::string> units;
    IndexResult final_index;
    ordered_json report;
    report["method"] = o.method;

    if (o.hierarchical) {
        if (o.data.empty() || o.meta.empty())
            throw ValidationError("--hierarchical requires --data and --meta (domain labels)");
        inputs = {o.data, o.meta};
        LoadOptions load;
        load.impute_missing = o.impute;
        const IndicatorDataset ds = load_dataset(o.data, o.meta, load);
        units = ds.units;

        HierarchicalOptions hopts;
        hopts.ampi_sign = sign;
        hopts.autosynth = cfg;
        hopts.autosynth_replications = o.replications;
        hopts.threads = g.threads;
        const HierarchicalResult hier = hierarchical_index(ds, method, hopts);
        final_index = hier.final_index;

        MatrixTable domains;
        domains.units = units;
        domains.columns = hier.domains;
        domains.values.resize(ds.n_units(), static_cast<Eigen::Index>(hier.domains.size()));
        for (std::size_t d = 0; d < hier.domain_indices.size(); ++d)
            domains.values.col(static_cast<Eigen::Index>(d)) = hier.domain_indices[d].values;
        write_matrix_csv((out_dir / "domains.csv").string(), domains);
        report["domains"] = hier.domains;
        report["polarity_flipped"] = final_index.polarity_flipped;
    } else {
        NormalizedMatrix R;
        std::vector<std::string> columns;
        if (!o.normalized.empty()) {
            inputs.push_back(o.normalized);
            MatrixTable table = read_matrix_csv(o.normalized);
            units = table.units;
            columns = table.columns;
            R = wrap_matrix(std::move(table.values));
        } else if (!o.data.empty() && o.auto_normalize) {
            inputs.push_back(o.data);
            std::string meta_path = o.meta;
            if (!meta_path.empty() && !fs::exists(meta_path)) {
                warnings.push_back("metadata file '" + meta_path + "' not found; defaults applied");
                meta_path.clear();
            }
            if (!meta_path.empty()) inputs.push_back(meta_path);
            LoadOptions load;
            load.impute_missing = o.impute;
            const IndicatorDataset ds = load_dataset(o.data, meta_path, load);
            units = ds.units;
            for (const auto& ind : ds.indicators) columns.push_back(ind.name);
            R = normalize(ds);
            warnings.insert(warnings.end(), R.warnings.begin(), R.warnings.end());
        } else {
            throw ValidationError(
                "index needs either --normalized FILE or --data FILE with --auto-normalize");
        }

        switch (method) {
        case Method::Mean:
            final_index = mean_index(R);
            report["polarity_flipped"] = false;
            break;
        case Method::AMPI:
            final_index = ampi_index(R, sign);
            report["sign"] = o.sign;
            report["polarity_flipped"] = false;
            break;
        case Method::PCA: {
            auto [idx, pca] = pca_index(R);
            final_index = std::move(idx);
            report["polarity_flipped"] = final_index.polarity_flipped;
            report["explained_variance_ratio"] = pca.explained_variance_ratio;
            break;
        }
        case Method::AutoSynth: {
            const IndexResult compass = ampi_index(R, sign);
            const AutoSynthResult result =
                autosynth_index(R.values, cfg, o.replications, compass, g.threads);
            final_index = result.index;
            report["polarity_flipped"] = final_index.polarity_flipped;
            report["flip_fraction"] = result.flip_fraction;
            report["replications"] = o.replications;
            report["successful_replications"] = static_cast<int>(result.losses.size());
            ordered_json rel = ordered_json::object();
            for (Eigen::Index j = 0; j < result.relevance.size(); ++j)
                rel[columns[static_cast<std::size_t>(j)]] = result.relevance[j];
            report["relevance"] = std::move(rel);
            report["loss"] = {{"median", median_of(result.losses)},
                              {"min", *std::min_element(result.losses.begin(),
                                                        result.losses.end())},
                              {"max", *std::max_element(result.losses.begin(),
                                                        result.losses.end())}};
            report["ensemble_quantiles"] =
                ensemble_quantiles_json(units, final_index.ensemble);
            if (o.write_ensemble) {
                MatrixTable ens;
                ens.units = units;
                for (Eigen::Index c = 0; c < final_index.ensemble.cols(); ++c) {
                    char buf[16];
                    std::snprintf(buf, sizeof(buf), "rep_%03lld", static_cast<long long>(c));
                    ens.columns.emplace_back(buf);
                }
                ens.values = final_index.ensemble;
                write_matrix_csv((out_dir / "ensemble.csv").string(), ens);
            }
            break;
        }
        }
    }

    print_warnings(warnings, g.quiet);
    write_index_csv(out_dir / "index.csv", units, final_index);
    write_json(out_dir / "report.json", report);

    ordered_json config;
    config["method"] = o.method;
    config["sign"] = o.sign;
    config["normalized"] = o.normalized;
    config["data"] = o.data;
    config["meta"] = o.meta;
    config["auto_normalize"] = o.auto_normalize;
    config["hierarchical"] = o.hierarchical;
    config["replications"] = o.replications;
    config["hidden"] = o.hidden;
    config["epochs"] = o.epochs;
    config["learning_rate"] = o.learning_rate;
    config["tolerance"] = o.tolerance;
    config["write_ensemble"] = o.write_ensemble;
    config["impute"] = o.impute;
    write_manifest(out_dir, "index", g, std::move(config), inputs, warnings);

    if (!g.quiet) {
        std::cout << "unit_id        value   rank\n";
        const Eigen::Index n = final_index.values.size();
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, 10); ++i) {
            std::printf("%-12s %8.2f %6d\n", units[static_cast<std::size_t>(i)].c_str(),
                        final_index.values[i], final_index.ranks[static_cast<std::size_t>(i)]);
        }
        if (n > 10) std::cout << "... (" << n << " units total)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOpts {
    std::string normalized;
    std::vector<std::string> index_files;
    std::string ensemble;
};

int cmd_compare(const GlobalOpts& g, const CompareOpts& o) {
    const fs::path out_dir(g.out);
    fs::create_directories(out_dir);

    std::vector<std::string> inputs = {o.normalized};
    MatrixTable table = read_matrix_csv(o.normalized);
    const std::vector<std::string> units = table.units;
    const NormalizedMatrix R = wrap_matrix(std::move(table.values));

    std::map<std::string, Eigen::Index> unit_pos;
    for (std::size_t i = 0; i < units.size(); ++i)
        unit_pos[units[i]] = static_cast<Eigen::Index>(i);

    auto align_to_units = [&](const std::vector<std::string>& ids, const Eigen::VectorXd& vals,
                              const std::string& origin) {
        if (ids.size() != units.size())
            throw ValidationError("unit set in " + origin + " does not match the matrix (" +
                                  std::to_string(ids.size()) + " vs " +
                                  std::to_string(units.size()) + " units)");
        Eigen::VectorXd out(vals.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto it = unit_pos.find(ids[i]);
            if (it == unit_pos.end())
                throw ValidationError("unit '" + ids[i] + "' in " + origin +
                                      " is absent from the matrix");
            out[it->second] = vals[static_cast<Eigen::Index>(i)];
        }
        return out;
    };

    std::vector<std::string> labels;
    std::vector<Eigen::VectorXd> values;
    for (const auto& file : o.index_files) {
        inputs.push_back(file);
        auto [ids, vals] = read_index_csv(file);
        values.push_back(align_to_units(ids, vals, file));
        labels.push_back(fs::path(file).stem().string());
    }

    ordered_json report;
    report["labels"] = labels;
    ordered_json per = ordered_json::object();
    std::string flat = "method,stress,rank_stress\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double s = stress(R, values[k]);
        const double rs = rank_stress(R, values[k]);
        per[labels[k]] = {{"stress", s}, {"rank_stress", rs}};
        flat += labels[k] + ',' + format17(s) + ',' + format17(rs) + '\n';
    }
    report["stress"] = std::move(per);
    write_text(out_dir / "compare.csv", flat);

    ordered_json rho_rows = ordered_json::array();
    std::string rho_csv = "method";
    for (const auto& l : labels) rho_csv += ',' + l;
    rho_csv += '\n';
    for (std::size_t a = 0; a < values.size(); ++a) {
        ordered_json row = ordered_json::array();
        rho_csv += labels[a];
        for (std::size_t b = 0; b < values.size(); ++b) {
            const double rho = a == b ? 1.0 : spearman(values[a], values[b]);
            row.push_back(rho);
            rho_csv += ',' + format17(rho);
        }
        rho_rows.push_back(std::move(row));
        rho_csv += '\n';
    }
    report["spearman"] = std::move(rho_rows);
    write_text(out_dir / "spearman.csv", rho_csv);

    if (!o.ensemble.empty()) {
        inputs.push_back(o.ensemble);
        MatrixTable ens = read_matrix_csv(o.ensemble);
        std::string per_rep = "replication,stress,rank_stress\n";
        std::vector<double> stresses;
        for (Eigen::Index c = 0; c < ens.values.cols(); ++c) {
            const Eigen::VectorXd col =
                align_to_units(ens.units, ens.values.col(c), o.ensemble);
            const double s = stress(R, col);
            per_rep += std::to_string(c) + ',' + format17(s) + ',' +
                       format17(rank_stress(R, col)) + '\n';
            stresses.push_back(s);
        }
        write_text(out_dir / "ensemble_stress.csv", per_rep);
        std::sort(stresses.begin(), stresses.end());
        report["ensemble"] = {{"file", o.ensemble},
                              {"replications", static_cast<int>(stresses.size())},
                              {"stress_p25", sorted_quantile(stresses, 0.25)},
                              {"stress_p50", sorted_quantile(stresses, 0.50)},
                              {"stress_p75", sorted_quantile(stresses, 0.75)}};
    }

    write_json(out_dir / "report.json", report);

    ordered_json config;
    config["normalized"] = o.normalized;
    config["index_files"] = o.index_files;
    config["ensemble"] = o.ensemble;
    write_manifest(out_dir, "compare", g, std::move(config), inputs, {});

    if (!g.quiet) {
        std::cout << "method            stress  rank_stress\n";
        for (std::size_t k = 0; k < labels.size(); ++k)
            std::printf("%-16s %7.2f %12.2f\n", labels[k].c_str(),
                        report["stress"][labels[k]]["stress"].get<double>(),
                        report["stress"][labels[k]]["rank_stress"].get<double>());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
    std::vector<std::string> dgps = {"iid"};
    std::vector<int> sizes = {50, 250, 1000};
    int reps = 1000;
    std::vector<std::string> methods = {"mean", "ampi", "pca", "autosynth"};
    int ensemble = 10;
    int p = 14;
    int hidden = 0;
    int epochs = 2000;
    double learning_rate = 1e-3;
    double tolerance = 1e-6;
};

int cmd_simulate(const GlobalOpts& g, const SimulateOpts& o) {
    const fs::path out_dir(g.out);
    fs::create_directories(out_dir);

    std::vector<DgpSpec> dgps;
    for (const auto& name : o.dgps) {
        const DgpKind kind = dgp_from_name(name);
        for (int n : o.sizes) dgps.push_back({kind, o.p, n, 0});
    }
    std::vector<Method> methods;
    for (const auto& name : o.methods) methods.push_back(method_from_name(name));

    TrainConfig cfg;
    cfg.hidden_width = o.hidden;
    cfg.max_epochs = o.epochs;
    cfg.learning_rate = o.learning_rate;
    cfg.tolerance = o.tolerance;

    StudyOptions opts;
    opts.master_seed = g.seed;
    opts.autosynth_replications = o.ensemble;
    opts.threads = g.threads;

    const SimulationReport report = run_study(dgps, methods, o.reps, cfg, opts);

    ordered_json doc;
    doc["replications"] = report.replications;
    doc["seed"] = report.master_seed;
    doc["ensemble"] = o.ensemble;
    ordered_json cells = ordered_json::array();
    std::string csv = "dgp,n,method,replication,stress,rank_stress\n";
    for (const auto& cell : report.cells) {
        ordered_json c;
        c["dgp"] = dgp_name(cell.kind);
        c["n"] = cell.n;
        c["method"] = method_name(cell.method);
        c["failures"] = cell.failures;
        c["stress_median"] = median_of(cell.stress);
        c["rank_stress_median"] = median_of(cell.rank_stress);
        c["stress"] = cell.stress;
        c["rank_stress"] = cell.rank_stress;
        cells.push_back(std::move(c));
        for (std::size_t r = 0; r < cell.stress.size(); ++r)
            csv += dgp_name(cell.kind) + ',' + std::to_string(cell.n) + ',' +
                   method_name(cell.method) + ',' + std::to_string(r) + ',' +
                   format17(cell.stress[r]) + ',' + format17(cell.rank_stress[r]) + '\n';
    }
    doc["cells"] = std::move(cells);
    write_json(out_dir / "report.json", doc);
    write_text(out_dir / "cells.csv", csv);

    ordered_json config;
    config["dgps"] = o.dgps;
    config["sizes"] = o.sizes;
    config["reps"] = o.reps;
    config["methods"] = o.methods;
    config["ensemble"] = o.ensemble;
    config["p"] = o.p;
    config["hidden"] = o.hidden;
    config["epochs"] = o.epochs;
    config["learning_rate"] = o.learning_rate;
    config["tolerance"] = o.tolerance;
    write_manifest(out_dir, "simulate", g, std::move(config), {}, {});

    if (!g.quiet) {
        std::cout << "dgp    n      method      median_stress\n";
        for (const auto& cell : report.cells)
            std::printf("%-6s %-6d %-11s %10.2f\n", dgp_name(cell.kind).c_str(), cell.n,
                        method_name(cell.method).c_str(), median_of(cell.stress));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"composite index construction and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")
        ->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress the stdout summary and warnings");

    NormalizeOpts n_opts;
    auto* norm = app.add_subcommand("normalize", "rescale raw indicators to [70, 130]");
    norm->add_option("--data", n_opts.data, "raw indicator CSV")->required();
    norm->add_option("--meta", n_opts.meta, "indicator metadata JSON");
    norm->add_option("--goalposts", n_opts.goalposts, "supplied goalposts JSON");
    norm->add_flag("--impute", n_opts.impute, "impute missing cells with column medians");

    IndexOpts i_opts;
    auto* idx = app.add_subcommand("index", "aggregate a matrix into a composite index");
    idx->add_option("--method", i_opts.method, "mean|ampi|pca|autosynth")
        ->required()
        ->check(CLI::IsMember({"mean", "ampi", "pca", "autosynth"}));
    idx->add_option("--normalized", i_opts.normalized, "normalized matrix CSV");
    idx->add_option("--data", i_opts.data, "raw indicator CSV");
    idx->add_option("--meta", i_opts.meta, "indicator metadata JSON");
    idx->add_flag("--auto-normalize", i_opts.auto_normalize, "normalize raw data first");
    idx->add_flag("--hierarchical", i_opts.hierarchical,
                  "aggregate within domains, then across domains");
    idx->add_option("--sign", i_opts.sign, "AMPI penalty sign")
        ->check(CLI::IsMember({"plus", "minus"}))
        ->capture_default_str();
    idx->add_option("--replications", i_opts.replications, "ensemble size")
        ->capture_default_str();
    idx->add_option("--hidden", i_opts.hidden, "hidden width (0 = ceil(p/2))")
        ->capture_default_str();
    idx->add_option("--epochs", i_opts.epochs, "max training epochs")->capture_default_str();
    idx->add_option("--lr", i_opts.learning_rate, "learning rate")->capture_default_str();
    idx->add_option("--tolerance", i_opts.tolerance, "early-stop tolerance")
        ->capture_default_str();
    idx->add_flag("--write-ensemble", i_opts.write_ensemble,
                  "write the full ensemble matrix as CSV");
    idx->add_flag("--impute", i_opts.impute, "impute missing cells with column medians");

    CompareOpts c_opts;
    auto* cmp = app.add_subcommand("compare", "stress and rank statistics across indices");
    cmp->add_option("--normalized", c_opts.normalized, "normalized matrix CSV")->required();
    cmp->add_option("--index", c_opts.index_files, "index CSV (repeatable)")->required();
    cmp->add_option("--ensemble", c_opts.ensemble, "ensemble matrix CSV");

    SimulateOpts s_opts;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo study over the three DGPs");
    sim->add_option("--dgp", s_opts.dgps, "iid|corr|mixed (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    sim->add_option("--n", s_opts.sizes, "sample sizes (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    sim->add_option("--reps", s_opts.reps, "replications per cell")->capture_default_str();
    sim->add_option("--methods", s_opts.methods, "methods (comma separated)")
        ->delimiter(',');
    sim->add_option("--ensemble", s_opts.ensemble, "autosynth ensemble size per replication")
        ->capture_default_str();
    sim->add_option("--p", s_opts.p, "number of indicators")->capture_default_str();
    sim->add_option("--hidden", s_opts.hidden, "hidden width (0 = ceil(p/2))")
        ->capture_default_str();
    sim->add_option("--epochs", s_opts.epochs, "max training epochs")->capture_default_str();
    sim->add_option("--lr", s_opts.learning_rate, "learning rate")->capture_default_str();
    sim->add_option("--tolerance", s_opts.tolerance, "early-stop tolerance")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(norm)) return cmd_normalize(g, n_opts);
        if (app.got_subcommand(idx)) return cmd_index(g, i_opts);
        if (app.got_subcommand(cmp)) return cmd_compare(g, c_opts);
        if (app.got_subcommand(sim)) return cmd_simulate(g, s_opts);
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
