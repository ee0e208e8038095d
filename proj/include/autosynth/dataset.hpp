// CSV ingestion, metadata handling and dataset validation.
#pragma once

#include "autosynth/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace autosynth {

struct LoadOptions {
    /// When true, non-finite cells are replaced by the per-column median of
    /// the finite entries instead of being rejected.
    bool impute_missing = false;
};

/// A bare matrix read from CSV: unit ids, column names, values.
struct MatrixTable {
    std::vector<std::string> units;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

/// Reads a CSV with a header row and a leading unit_id column.
/// Throws ParseError naming the offending row on malformed input.
MatrixTable read_matrix_csv(const std::string& csv_path);

/// Writes a MatrixTable back to CSV with 17-significant-digit values.
void write_matrix_csv(const std::string& csv_path, const MatrixTable& table);

/// Loads a dataset from a data CSV plus an optional JSON metadata file
/// (indicator name -> {polarity, domain, weight}). Indicators missing from
/// the metadata default to Positive polarity, empty domain and uniform
/// weight. The returned dataset is validated and its weights normalized.
IndicatorDataset load_dataset(const std::string& csv_path,
                              const std::string& meta_path = "",
                              const LoadOptions& options = {});

/// Serializes a dataset to a data CSV plus a metadata JSON; reloading the
/// pair yields a bit-equal dataset.
void save_dataset(const IndicatorDataset& dataset, const std::string& csv_path,
                  const std::string& meta_path);

/// Rescales indicator weights to sum to 1. Idempotent.
/// Throws ValidationError when all weights are zero or any is negative.
IndicatorDataset validate_weights(IndicatorDataset dataset);

/// Enforces the dataset invariants: N >= 2, p >= 2, unique nonempty names,
/// finite entries (or imputation when allowed) and non-constant columns.
/// Returns the dataset with any imputation applied.
IndicatorDataset validate_dataset(IndicatorDataset dataset,
                                  const LoadOptions& options = {});

}  // namespace autosynth
