// Monte Carlo study: three data-generating processes over a sample-size
// sweep, a seeded replication runner, and aggregated stress distributions.
#pragma once

#include "autosynth/autoencoder.hpp"
#include "autosynth/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace autosynth {

enum class DgpKind { IidNormal, CorrelatedNormal, CorrelatedMixed };

std::string dgp_name(DgpKind kind);
DgpKind dgp_from_name(const std::string& name);

struct DgpSpec {
    DgpKind kind = DgpKind::IidNormal;
    int p = 14;
    int n = 50;
    std::uint64_t seed = 0;
};

/// Deterministic seed-stream mixing (splitmix64 over combined words).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Random correlation matrix from 3-factor loadings, normalized to unit
/// diagonal and regenerated until its off-diagonal entries span a wide
/// range. Throws NumericError after 100 failed attempts.
Eigen::MatrixXd random_correlation(int p, std::uint64_t seed);

/// The correlation matrix generate() couples its draws with (identity for
/// the iid process). Assumes the first draw is non-degenerate.
Eigen::MatrixXd target_correlation(const DgpSpec& spec);

/// Draws one dataset from the process. Every returned dataset passes the
/// standard validation (regeneration on a degenerate draw).
IndicatorDataset generate(const DgpSpec& spec);

struct SimulationCell {
    DgpKind kind = DgpKind::IidNormal;
    int n = 0;
    Method method = Method::Mean;
    std::vector<double> stress;       // one entry per successful replication
    std::vector<double> rank_stress;
    int failures = 0;
};

struct SimulationReport {
    int replications = 0;
    std::uint64_t master_seed = 0;
    std::vector<SimulationCell> cells;

    const SimulationCell& cell(DgpKind kind, int n, Method method) const;
};

struct StudyOptions {
    std::uint64_t master_seed = 0;
    int autosynth_replications = 10;  // ensemble size inside a replication
    AmpiSign ampi_sign = AmpiSign::Plus;
    int threads = 0;
};

/// Runs the full study: per replication, generate - normalize - index with
/// every method - record stress and rank-stress. Replication seeds derive
/// from the master seed by cell and replication index, so results are
/// independent of execution order. Failed replications are skipped; more
/// than 5% failures in any cell is an error.
SimulationReport run_study(const std::vector<DgpSpec>& dgps,
                           const std::vector<Method>& methods, int replications,
                           const TrainConfig& autosynth_config,
                           const StudyOptions& options = {});

}  // namespace autosynth
