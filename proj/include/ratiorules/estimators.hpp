#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ratiorules/transaction_store.hpp"

namespace ratiorules {

/// C(x,y) / (C(y) + lambda).
struct Proposed {
    double lambda = 0.0;
};

/// C(x,y) / C(y) when C(x,y) > theta, else 0.
struct AprioriMle {
    Count theta = 0;
};

/// (C(x,y) + mu) / (C(y) + mu * classes).
struct AdditiveSmoothing {
    double mu = 0.0;
    Count classes = 2;
};

/// Posterior mean under a Beta(alpha, beta) prior.
struct BetaPosterior {
    double alpha = 1.0;
    double beta = 1.0;
};

struct Mle {};

using EstimatorSpec = std::variant<Proposed, AprioriMle, AdditiveSmoothing, BetaPosterior, Mle>;

enum class Family { proposed, apriori, additive, beta, mle };

Family family_of(const EstimatorSpec& spec) noexcept;
Family parse_family(std::string_view name);
std::string_view to_string(Family family) noexcept;

/// Human-readable `family key=value ...`.
std::string describe(const EstimatorSpec& spec);

/// Throws InvalidArgument if a parameter is outside its family's domain.
void validate(const EstimatorSpec& spec);

/// The family's single tunable parameter (lambda, theta or mu).
bool has_tunable_parameter(Family family) noexcept;
double tunable_parameter(const EstimatorSpec& spec);
/// Copy of `base` with its tunable parameter replaced. Theta is truncated
/// toward zero after a range check.
EstimatorSpec with_tunable_parameter(const EstimatorSpec& base, double value);

using Score = double;

/// Score from raw counts. Requires cxy <= cy. Throws UndefinedRatio where
/// the family has no value at cy = 0.
Score score_from_counts(const EstimatorSpec& spec, Count cxy, Count cy);

/// Strength of the rule x <- y.
Score score(const EstimatorSpec& spec, const CooccurrenceCounts& counts, ItemId x, ItemId y);

/// Candidate rule x <- y: x is the consequent, y the antecedent.
struct RulePair {
    ItemId consequent;
    ItemId antecedent;

    auto operator<=>(const RulePair&) const = default;
};

struct RulePairHash {
    std::size_t operator()(const RulePair& p) const noexcept {
        return std::hash<std::uint64_t>{}((std::uint64_t{p.consequent} << 32) | p.antecedent);
    }
};

using PairSet = std::vector<RulePair>;
using ScoreMap = std::unordered_map<RulePair, Score, RulePairHash>;

/// Pointwise score() over `candidates`. An error names the offending pair.
ScoreMap score_all(const EstimatorSpec& spec, const CooccurrenceCounts& counts, const PairSet& candidates);

}  // namespace ratiorules
