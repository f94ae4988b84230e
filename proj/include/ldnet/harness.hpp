#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ldnet/experiment.hpp"

namespace ldnet {

/// Metrics of one estimator on one replication. Metrics that do not apply
/// (model error without a true mean, say) are NaN.
struct ReplicationRow {
    std::string estimator;
    int replication = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;

    double mse = 0.0;
    double mspe = 0.0;
    int nc = 0;
    int nic = 0;
    bool exact_match = false;
    double frobenius = 0.0;
    double lambda_selected = 0.0;
    int epochs = 0;
    double eta = 0.0;
    double wall_ms = 0.0;
    Matrix dcor;  // pairwise dcor of the training responses
};

/// Mean and standard error (sample SD / sqrt(count)) over successful rows.
struct Aggregate {
    std::string estimator;
    int count = 0;
    int failures = 0;
    int nt = 0;  // replications recovering the exact true model
    double mean_mse = 0, se_mse = 0;
    double mean_mspe = 0, se_mspe = 0;
    double mean_nc = 0, se_nc = 0;
    double mean_nic = 0, se_nic = 0;
    double mean_exact = 0, se_exact = 0;
    double mean_frobenius = 0, se_frobenius = 0;
    double mean_lambda = 0, se_lambda = 0;
    double mean_epochs = 0, se_epochs = 0;
    double mean_wall_ms = 0, se_wall_ms = 0;
};

struct ReplicationTable {
    std::string experiment;
    std::map<std::string, std::string> config;
    std::vector<ReplicationRow> rows;  // replication-major, estimator order as configured
    std::vector<Aggregate> aggregates;
    std::vector<std::string> warnings;

    const Aggregate& aggregate(const std::string& estimator) const;
    std::vector<const ReplicationRow*> rows_for(const std::string& estimator) const;
};

struct SimulatedData {
    Dataset train;  // contaminated when config.alpha > 0
    Dataset val;
    Dataset test;
};

/// Train / validation / test sets of a simulated design for one replication seed.
SimulatedData simulate_data(const ExperimentConfig& config, std::uint64_t replication_seed);

/// Seed of replication r; pairwise distinct in r.
std::uint64_t replication_seed(std::uint64_t base_seed, int replication);

/// Per-estimator aggregates recomputed from rows, in first-seen estimator order.
std::vector<Aggregate> aggregate_rows(const std::vector<ReplicationRow>& rows);

/// Runs every replication (on up to config.workers threads) and merges the
/// rows in replication order.
ReplicationTable run_experiment(const ExperimentConfig& config);

}  // namespace ldnet
