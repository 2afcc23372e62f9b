#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ratiorules/estimators.hpp"
#include "ratiorules/transaction_store.hpp"

namespace ratiorules {

/// Candidate rules x <- y with x consequent, y antecedent and C(x,y) >= 1,
/// sorted by (x, y) id.
PairSet candidate_pairs(const CooccurrenceCounts& counts, const std::vector<DomainLabel>& domains);

/// Known-correct (consequent, antecedent) token pairs.
class GroundTruth {
public:
    GroundTruth() = default;
    explicit GroundTruth(std::vector<std::pair<std::string, std::string>> pairs);

    /// Sorted, unique.
    const std::vector<std::pair<std::string, std::string>>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
};

/// `consequent<TAB>antecedent` lines; duplicates collapse.
GroundTruth read_ground_truth(std::istream& in);
void write_ground_truth(std::ostream& out, const GroundTruth& truth);

/// Ground truth resolved to ids. Only pairs whose two items both occur in
/// the data (C >= 1) are kept; their number is the recall denominator.
struct ResolvedTruth {
    std::unordered_set<RulePair, RulePairHash> pairs;

    std::size_t denominator() const noexcept { return pairs.size(); }
    bool contains(const RulePair& p) const { return pairs.count(p) != 0; }
};

ResolvedTruth resolve_truth(const GroundTruth& truth, const Vocabulary& vocab, const CooccurrenceCounts& counts);

struct RankedRule {
    std::size_t rank;  // 1-based
    ItemId consequent;
    ItemId antecedent;
    Score score;
    Count cxy;
    Count cy;
};

using RankedRules = std::vector<RankedRule>;

/// Descending score; ties by descending C(x,y), then ascending consequent
/// token, then ascending antecedent token. Throws on non-finite scores.
RankedRules rank(const ScoreMap& scores, const CooccurrenceCounts& counts, const Vocabulary& vocab);

/// |truth among the top k| / denominator. k past the end uses the whole list.
double recall_at(const RankedRules& ranked, const ResolvedTruth& truth, std::size_t k);

/// |truth among the top k| / k, k >= 1.
double precision_at(const RankedRules& ranked, const ResolvedTruth& truth, std::size_t k);

struct CurvePoint {
    std::size_t rank;
    double recall;
    double precision;
};

struct RecallCurve {
    std::vector<CurvePoint> points;
    std::size_t true_rules = 0;
    std::size_t candidates = 0;
};

/// Points at k = step, 2 step, ... and at the full list length.
RecallCurve curve(const RankedRules& ranked, const ResolvedTruth& truth, std::size_t step);

/// `rank<TAB>consequent<TAB>antecedent<TAB>score<TAB>cxy<TAB>cy`, score
/// at 6 decimals.
void write_ranked(std::ostream& out, const RankedRules& ranked, const Vocabulary& vocab);
/// Reads write_ranked output; tokens resolve against `vocab`. Scores are
/// read back at their printed precision.
RankedRules read_ranked(std::istream& in, const Vocabulary& vocab);

/// `rank,recall,precision` header then one row per point at 6 decimals.
void write_curve(std::ostream& out, const RecallCurve& c);

/// Precomputed candidates for repeated top-K evaluation under varying
/// estimator parameters. Produces the same top-K set as rank().
class RankingTask {
public:
    RankingTask(const CooccurrenceCounts& counts, const Vocabulary& vocab, const std::vector<DomainLabel>& domains,
                const GroundTruth& truth);

    std::size_t candidate_count() const noexcept { return entries_.size(); }
    std::size_t denominator() const noexcept { return denominator_; }

    /// Number of true rules in the top k under `spec`.
    std::size_t true_positives_at(const EstimatorSpec& spec, std::size_t k) const;
    double recall_at(const EstimatorSpec& spec, std::size_t k) const;

private:
    struct Entry {
        Count cxy;
        Count cy;
        std::uint32_t lex_x;
        std::uint32_t lex_y;
        bool is_true;
    };
    std::vector<Entry> entries_;
    std::size_t denominator_ = 0;
};

/// Position of each id in the lexicographic order of tokens.
std::vector<std::uint32_t> lexical_ranks(const Vocabulary& vocab);

}  // namespace ratiorules
