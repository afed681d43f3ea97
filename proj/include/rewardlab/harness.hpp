#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rewardlab/gen.hpp"
#include "rewardlab/metrics.hpp"
#include "rewardlab/regret.hpp"

namespace rewardlab {

/// Settings of one correlation run: environments to generate, metrics to
/// evaluate, regret mode and the master seed everything derives from.
struct ExperimentConfig {
    GenConfig gen;
    int n_envs = 8;
    std::vector<std::string> metric_specs = {
        "VAL-2-2", "VAL-1-1", "VALPotential-1-weighted_1", "EPIC-2-2", "DARD-2-2"};
    RegretMode regret_mode = RegretMode::Exact;
    std::uint64_t master_seed = 0;
    int parallelism = 0; // 0 = one worker per hardware thread
};

/// One (environment, pair, interpolation step) comparison. Metric values are
/// aligned with the configured spec list; NaN marks a value the metric could
/// not produce (recorded and excluded pairwise from its correlation).
struct ComparisonRecord {
    int env_id = 0;
    int pair_id = 0;
    int interp_step = 0;
    double regret = 0.0;
    std::vector<double> metric_values;
};

/// Per-metric Pearson correlation against regret, sorted descending
/// (ties broken by spec string).
struct CorrelationSummary {
    struct Row {
        std::string spec;
        double correlation;
        long n_samples;
    };
    std::vector<Row> rows;
};

struct ExperimentResult {
    std::vector<ComparisonRecord> records;
    CorrelationSummary summary;
};

/// Runs the full sweep: for every environment and every (pair, interpolant),
/// the regret between the pair's first reward and the interpolant, plus each
/// configured metric distance. Deterministic for a given master seed
/// regardless of the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Builds the summary from an existing record set (pairwise deletion of
/// missing metric values).
CorrelationSummary summarise_records(const std::vector<ComparisonRecord>& records,
                                     const std::vector<std::string>& specs);

/// Sample Pearson correlation, one-pass. Throws LengthMismatch for unequal
/// or too-short inputs and ZeroVariance when either side is constant.
double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

void write_records_csv(const std::vector<ComparisonRecord>& records,
                       const std::vector<std::string>& specs, const std::string& path);

/// Reads a records CSV back; fills `specs_out` from the header.
std::vector<ComparisonRecord> read_records_csv(const std::string& path,
                                               std::vector<std::string>& specs_out);

void write_summary_csv(const CorrelationSummary& summary, const std::string& path);

/// Standalone SVG scatter of (metric value, regret) for one configured spec,
/// with axes and the Pearson correlation annotated. Same input, same bytes.
void emit_scatter_svg(const std::vector<ComparisonRecord>& records,
                      const std::vector<std::string>& specs, const std::string& spec,
                      const std::string& path);

} // namespace rewardlab
