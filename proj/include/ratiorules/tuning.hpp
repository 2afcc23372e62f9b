#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ratiorules/estimators.hpp"
#include "ratiorules/evaluation.hpp"

namespace ratiorules {

struct SearchConfig {
    // Integer sweep for theta.
    Count theta_max = 20;
    // Coarse grid over [grid_lo, grid_hi] for lambda and mu, then one pass
    // at refine_step within +-grid_step of the best coarse point.
    double grid_lo = 0.0;
    double grid_hi = 20.0;
    double grid_step = 0.25;
    double refine_step = 0.01;
};

struct TuningOutcome {
    EstimatorSpec spec;  // base spec with the winning parameter
    double parameter = 0.0;
    double recall = 0.0;
    std::size_t k = 0;
    std::vector<std::pair<double, double>> trace;  // (parameter, recall at k) in evaluation order
};

/// Picks the tunable parameter of `base`'s family maximizing recall at k on
/// `task`. Ties go to the smaller parameter.
TuningOutcome tune(const EstimatorSpec& base, const RankingTask& task, std::size_t k, const SearchConfig& search = {});

/// Recall at each of `ks` on a held-out dataset with the tuned estimator frozen.
std::vector<double> apply_prior_period(const TuningOutcome& outcome, const CooccurrenceCounts& test_counts,
                                       const Vocabulary& vocab, const std::vector<DomainLabel>& domains,
                                       const GroundTruth& truth, const std::vector<std::size_t>& ks);

/// Parameter grid points for a tunable real parameter: lo + i step, i >= 0,
/// up to hi inclusive (with 1e-9 slack).
std::vector<double> grid_points(double lo, double hi, double step);

/// Key-value text: `key=value` per line.
void write_outcome(std::ostream& out, const TuningOutcome& outcome);
/// Reads write_outcome output. The trace is not restored.
TuningOutcome read_outcome(std::istream& in);

}  // namespace ratiorules
