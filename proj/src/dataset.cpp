#include "autosynth/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace autosynth {

namespace {

// Minimal RFC-4180 field splitter: handles quoted fields and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (in_quotes)
        throw ParseError("unterminated quote on row " + std::to_string(line_no));
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Parses a cell into a double; empty / "na" / "nan" become NaN so the
// validation step can decide between rejection and imputation.
double parse_cell(const std::string& raw, std::size_t line_no, const std::string& column) {
    std::string s = trim(raw);
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "na" || lower == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("row " + std::to_string(line_no) + ", column '" + column +
                         "': cannot parse value '" + s + "'");
    return v;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Polarity polarity_from_string(const std::string& s, const std::string& name) {
    if (s == "positive") return Polarity::Positive;
    if (s == "negative") return Polarity::Negative;
    throw ParseError("metadata for '" + name + "': polarity must be \"positive\" or \"negative\", got \"" + s + "\"");
}

}  // namespace

MatrixTable read_matrix_csv(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in)
        throw ParseError("cannot open CSV file: " + csv_path);

    MatrixTable table;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        throw ParseError("empty CSV file: " + csv_path);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line, line_no);
    if (header.size() < 2)
        throw ParseError("header row must name at least one data column after unit_id");
    for (std::size_t j = 1; j < header.size(); ++j)
        table.columns.push_back(trim(header[j]));

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line, line_no);
        if (fields.size() != header.size())
            throw ParseError("row " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        table.units.push_back(trim(fields[0]));
        std::vector<double> row(table.columns.size());
        for (std::size_t j = 0; j < table.columns.size(); ++j)
            row[j] = parse_cell(fields[j + 1], line_no, table.columns[j]);
        rows.push_back(std::move(row));
    }

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(table.columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < table.columns.size(); ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

void write_matrix_csv(const std::string& csv_path, const MatrixTable& table) {
    std::ofstream out(csv_path);
    if (!out)
        throw Error("cannot open file for writing: " + csv_path);
    out << "unit_id";
    for (const auto& c : table.columns) out << ',' << quote_if_needed(c);
    out << '\n';
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        out << quote_if_needed(table.units[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < table.values.cols(); ++j)
            out << ',' << format_value(table.values(i, j));
        out << '\n';
    }
}

IndicatorDataset validate_dataset(IndicatorDataset dataset, const LoadOptions& options) {
    const Eigen::Index n = dataset.values.rows();
    const Eigen::Index p = dataset.values.cols();
    if (n < 2)
        throw ValidationError("dataset needs at least 2 units, got " + std::to_string(n));
    if (p < 2)
        throw ValidationError("dataset needs at least 2 indicators, got " + std::to_string(p));
    if (static_cast<Eigen::Index>(dataset.units.size()) != n)
        throw ValidationError("unit id count does not match row count");
    if (static_cast<Eigen::Index>(dataset.indicators.size()) != p)
        throw ValidationError("indicator metadata count does not match column count");

    std::unordered_set<std::string> seen;
    for (const auto& u : dataset.units) {
        if (u.empty()) throw ValidationError("empty unit identifier");
        if (!seen.insert(u).second)
            throw ValidationError("duplicate unit identifier: " + u);
    }
    seen.clear();
    for (const auto& ind : dataset.indicators) {
        if (ind.name.empty()) throw ValidationError("empty indicator name");
        if (!seen.insert(ind.name).second)
            throw ValidationError("duplicate indicator name: " + ind.name);
        if (!(ind.weight >= 0.0))
            throw ValidationError("indicator '" + ind.name + "' has negative weight");
    }

    for (Eigen::Index j = 0; j < p; ++j) {
        const std::string& name = dataset.indicators[static_cast<std::size_t>(j)].name;
        std::vector<double> finite;
        finite.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::isfinite(dataset.values(i, j))) finite.push_back(dataset.values(i, j));

        if (static_cast<Eigen::Index>(finite.size()) < n) {
            if (!options.impute_missing) {
                for (Eigen::Index i = 0; i < n; ++i)
                    if (!std::isfinite(dataset.values(i, j)))
                        throw ValidationError("non-finite value at unit '" + dataset.units[static_cast<std::size_t>(i)] +
                                              "', indicator '" + name + "'");
            }
            if (finite.empty())
                throw ValidationError("indicator '" + name + "' has no finite values to impute from");
            std::sort(finite.begin(), finite.end());
            const std::size_t m = finite.size();
            const double median = (m % 2 == 1) ? finite[m / 2]
                                               : 0.5 * (finite[m / 2 - 1] + finite[m / 2]);
            for (Eigen::Index i = 0; i < n; ++i)
                if (!std::isfinite(dataset.values(i, j))) dataset.values(i, j) = median;
        }

        const double lo = dataset.values.col(j).minCoeff();
        const double hi = dataset.values.col(j).maxCoeff();
        if (!(hi > lo))
            throw ValidationError("indicator '" + name + "' is constant (min equals max)");
    }
    return dataset;
}

IndicatorDataset validate_weights(IndicatorDataset dataset) {
    double total = 0.0;
    for (const auto& ind : dataset.indicators) {
        if (!(ind.weight >= 0.0))
            throw ValidationError("indicator '" + ind.name + "' has negative weight");
        total += ind.weight;
    }
    if (total <= 0.0)
        throw ValidationError("all indicator weights are zero");
    // skip the division when the sum is already 1 up to rounding noise, so
    // renormalization is idempotent and survives serialization bit-exactly
    if (std::abs(total - 1.0) > 1e-12)
        for (auto& ind : dataset.indicators) ind.weight /= total;
    return dataset;
}

IndicatorDataset load_dataset(const std::string& csv_path, const std::string& meta_path,
                              const LoadOptions& options) {
    MatrixTable table = read_matrix_csv(csv_path);

    IndicatorDataset ds;
    ds.units = std::move(table.units);
    ds.values = std::move(table.values);
    const std::size_t p = table.columns.size();
    ds.indicators.reserve(p);
    for (const auto& name : table.columns) {
        IndicatorMeta meta;
        meta.name = name;
        meta.weight = 1.0 / static_cast<double>(p);
        ds.indicators.push_back(std::move(meta));
    }

    if (!meta_path.empty()) {
        std::ifstream in(meta_path);
        if (!in)
            throw ParseError("cannot open metadata file: " + meta_path);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("metadata file " + meta_path + ": " + e.what());
        }
        if (!doc.is_object())
            throw ParseError("metadata file must be a JSON object keyed by indicator name");
        for (auto& ind : ds.indicators) {
            auto it = doc.find(ind.name);
            if (it == doc.end()) continue;
            const auto& entry = *it;
            if (entry.contains("polarity"))
                ind.polarity = polarity_from_string(entry["polarity"].get<std::string>(), ind.name);
            if (entry.contains("domain"))
                ind.domain = entry["domain"].get<std::string>();
            if (entry.contains("weight"))
                ind.weight = entry["weight"].get<double>();
        }
    }

    ds = validate_dataset(std::move(ds), options);
    return validate_weights(std::move(ds));
}

void save_dataset(const IndicatorDataset& dataset, const std::string& csv_path,
                  const std::string& meta_path) {
    MatrixTable table;
    table.units = dataset.units;
    for (const auto& ind : dataset.indicators) table.columns.push_back(ind.name);
    table.values = dataset.values;
    write_matrix_csv(csv_path, table);

    nlohmann::ordered_json doc;
    for (const auto& ind : dataset.indicators) {
        doc[ind.name] = {
            {"polarity", ind.polarity == Polarity::Positive ? "positive" : "negative"},
            {"domain", ind.domain},
            {"weight", ind.weight},
        };
    }
    std::ofstream out(meta_path);
    if (!out)
        throw Error("cannot open file for writing: " + meta_path);
    out << doc.dump(2) << '\n';
}

}  // namespace autosynth
