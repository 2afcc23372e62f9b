#include "ratiorules/optimizer_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ratiorules/counter_rng.hpp"
#include "ratiorules/direct_estimation.hpp"

namespace ratiorules {

TransactionDatabase random_database(std::uint64_t seed, std::uint64_t index, std::size_t max_items,
                                    std::size_t max_records) {
    CounterRng rng(seed, index);
    const std::size_t items = 1 + rng.below(std::max<std::size_t>(1, max_items));
    const std::size_t records = 1 + rng.below(std::max<std::size_t>(1, max_records));
    const double rate = 0.1 + 0.8 * rng.uniform();
    std::vector<std::string> names;
    for (std::size_t i = 0; i < items; ++i) names.push_back("i" + std::to_string(i));
    TransactionDatabase db;
    const DomainTable none;
    for (std::size_t r = 0; r < records; ++r) {
        std::vector<std::string_view> tokens;
        for (const auto& n : names)
            if (rng.uniform() < rate) tokens.push_back(n);
        db.add_record(tokens, none);
    }
    return db;
}

OptimizerCheckReport check_optimizer(const OptimizerCheckConfig& cfg) {
    OptimizerCheckReport report;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto db = random_database(cfg.seed, t, cfg.max_items, cfg.max_records);
        const auto counts = count(db);
        ++report.trials;
        for (double lambda : cfg.lambdas) {
            const CostConfig<double> cost{lambda};
            const auto exact = analytic_solution(counts, cost);
            const auto numeric = numeric_minimizer(counts, cost, cfg.tol);
            ++report.solves;
            if (exact.size() > 0) {
                report.max_discrepancy =
                    std::max(report.max_discrepancy, (exact.values() - numeric.values()).cwiseAbs().maxCoeff());
                report.max_gradient_at_solution =
                    std::max(report.max_gradient_at_solution, objective_gradient(exact, counts, cost).max_abs());
            }
        }
    }
    return report;
}

}  // namespace ratiorules
