#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ratiorules/transaction_store.hpp"

namespace ratiorules {

/// Random database: up to `max_items` items over up to `max_records`
/// records, each item present in a record with a per-database rate.
TransactionDatabase random_database(std::uint64_t seed, std::uint64_t index, std::size_t max_items,
                                    std::size_t max_records);

struct OptimizerCheckConfig {
    std::size_t trials = 100;
    std::uint64_t seed = 7;
    std::size_t max_items = 8;
    std::size_t max_records = 50;
    std::vector<double> lambdas{0.5, 1.0, 5.0};
    double tol = 1e-10;
};

struct OptimizerCheckReport {
    std::size_t trials = 0;
    std::size_t solves = 0;  // trials x lambdas
    double max_discrepancy = 0.0;        // max |analytic - numeric| per component
    double max_gradient_at_solution = 0.0;  // max |gradient| at the analytic solution
};

/// Compares analytic_solution against numeric_minimizer on random databases.
OptimizerCheckReport check_optimizer(const OptimizerCheckConfig& cfg);

}  // namespace ratiorules
