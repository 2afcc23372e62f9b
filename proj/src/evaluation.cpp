#include "ratiorules/evaluation.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <string_view>

#include "ratiorules/errors.hpp"
#include "text_util.hpp"

namespace ratiorules {

namespace {

using detail::split_tabs;
using detail::strip_cr;
using detail::fixed6;

std::size_t hits_in_top(const RankedRules& ranked, const ResolvedTruth& truth, std::size_t k) {
    const std::size_t limit = std::min(k, ranked.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < limit; ++i)
        hits += truth.contains({ranked[i].consequent, ranked[i].antecedent}) ? 1 : 0;
    return hits;
}

}  // namespace

PairSet candidate_pairs(const CooccurrenceCounts& counts, const std::vector<DomainLabel>& domains) {
    if (domains.size() != counts.vocab_size()) throw VocabularyMismatch("domain labels do not cover the vocabulary");
    PairSet out;
    for (const auto& [packed, c] : counts.pairs()) {
        if (c == 0) continue;
        const auto key = PairKey::unpack(packed);
        const auto a = domains[key.lo];
        const auto b = domains[key.hi];
        if (a == DomainLabel::consequent && b == DomainLabel::antecedent) out.push_back({key.lo, key.hi});
        if (b == DomainLabel::consequent && a == DomainLabel::antecedent) out.push_back({key.hi, key.lo});
    }
    std::sort(out.begin(), out.end());
    return out;
}

GroundTruth::GroundTruth(std::vector<std::pair<std::string, std::string>> pairs) : pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

GroundTruth read_ground_truth(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto view = strip_cr(line);
        if (view.empty() || view.front() == '#') continue;
        const auto f = split_tabs(view);
        if (f.size() != 2 || f[0].empty() || f[1].empty())
            throw FormatError("expected consequent<TAB>antecedent", line_number);
        pairs.emplace_back(std::string(f[0]), std::string(f[1]));
    }
    return GroundTruth(std::move(pairs));
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
    for (const auto& [x, y] : truth.pairs()) out << x << '\t' << y << '\n';
}

ResolvedTruth resolve_truth(const GroundTruth& truth, const Vocabulary& vocab, const CooccurrenceCounts& counts) {
    if (counts.vocab_size() != vocab.size()) throw VocabularyMismatch("counts were not built over this vocabulary");
    ResolvedTruth out;
    for (const auto& [xs, ys] : truth.pairs()) {
        const auto x = vocab.find(xs);
        const auto y = vocab.find(ys);
        if (!x || !y || counts.unary(*x) == 0 || counts.unary(*y) == 0) continue;
        out.pairs.insert({*x, *y});
    }
    return out;
}

std::vector<std::uint32_t> lexical_ranks(const Vocabulary& vocab) {
    std::vector<ItemId> order(vocab.size());
    std::iota(order.begin(), order.end(), ItemId{0});
    std::sort(order.begin(), order.end(), [&](ItemId a, ItemId b) { return vocab.token(a) < vocab.token(b); });
    std::vector<std::uint32_t> out(vocab.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) out[order[r]] = r;
    return out;
}

RankedRules rank(const ScoreMap& scores, const CooccurrenceCounts& counts, const Vocabulary& vocab) {
    if (counts.vocab_size() != vocab.size()) throw VocabularyMismatch("counts were not built over this vocabulary");
    const auto lex = lexical_ranks(vocab);
    RankedRules out;
    out.reserve(scores.size());
    for (const auto& [p, s] : scores) {
        if (!std::isfinite(s)) throw InvalidArgument("non-finite score");
        out.push_back({0, p.consequent, p.antecedent, s, counts.pair(p.consequent, p.antecedent), counts.unary(p.antecedent)});
    }
    std::sort(out.begin(), out.end(), [&](const RankedRule& a, const RankedRule& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.cxy != b.cxy) return a.cxy > b.cxy;
        if (a.consequent != b.consequent) return lex[a.consequent] < lex[b.consequent];
        return lex[a.antecedent] < lex[b.antecedent];
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

double recall_at(const RankedRules& ranked, const ResolvedTruth& truth, std::size_t k) {
    if (truth.denominator() == 0) throw InvalidArgument("no evaluable true rules");
    return static_cast<double>(hits_in_top(ranked, truth, k)) / static_cast<double>(truth.denominator());
}

double precision_at(const RankedRules& ranked, const ResolvedTruth& truth, std::size_t k) {
    if (k == 0) throw InvalidArgument("precision at rank 0 is undefined");
    return static_cast<double>(hits_in_top(ranked, truth, k)) / static_cast<double>(k);
}

RecallCurve curve(const RankedRules& ranked, const ResolvedTruth& truth, std::size_t step) {
    if (step == 0) throw InvalidArgument("curve step must be >= 1");
    if (truth.denominator() == 0) throw InvalidArgument("no evaluable true rules");
    RecallCurve out;
    out.true_rules = truth.denominator();
    out.candidates = ranked.size();
    const double denom = static_cast<double>(truth.denominator());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        hits += truth.contains({ranked[i].consequent, ranked[i].antecedent}) ? 1 : 0;
        const std::size_t k = i + 1;
        if (k % step == 0 || k == ranked.size())
            out.points.push_back({k, static_cast<double>(hits) / denom, static_cast<double>(hits) / static_cast<double>(k)});
    }
    return out;
}

void write_ranked(std::ostream& out, const RankedRules& ranked, const Vocabulary& vocab) {
    for (const auto& r : ranked)
        out << r.rank << '\t' << vocab.token(r.consequent) << '\t' << vocab.token(r.antecedent) << '\t' << fixed6(r.score)
            << '\t' << r.cxy << '\t' << r.cy << '\n';
}

RankedRules read_ranked(std::istream& in, const Vocabulary& vocab) {
    RankedRules out;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto view = strip_cr(line);
        if (view.empty()) continue;
        const auto f = split_tabs(view);
        if (f.size() != 6) throw FormatError("expected 6 tab-separated fields", line_number);
        const auto x = vocab.find(f[1]);
        const auto y = vocab.find(f[2]);
        if (!x || !y) throw FormatError("unknown token in ranked list", line_number);
        RankedRule r{};
        try {
            std::size_t used = 0;
            r.rank = std::stoull(std::string(f[0]), &used);
            if (used != f[0].size()) throw std::invalid_argument("rank");
            r.score = std::stod(std::string(f[3]), &used);
            if (used != f[3].size()) throw std::invalid_argument("score");
            r.cxy = std::stoull(std::string(f[4]), &used);
            if (used != f[4].size()) throw std::invalid_argument("cxy");
            r.cy = std::stoull(std::string(f[5]), &used);
            if (used != f[5].size()) throw std::invalid_argument("cy");
        } catch (const std::exception&) {
            throw FormatError("bad numeric field", line_number);
        }
        if (r.rank != out.size() + 1) throw FormatError("ranks must be contiguous from 1", line_number);
        r.consequent = *x;
        r.antecedent = *y;
        out.push_back(r);
    }
    return out;
}

void write_curve(std::ostream& out, const RecallCurve& c) {
    out << "rank,recall,precision\n";
    for (const auto& p : c.points) out << p.rank << ',' << fixed6(p.recall) << ',' << fixed6(p.precision) << '\n';
}

RankingTask::RankingTask(const CooccurrenceCounts& counts, const Vocabulary& vocab, const std::vector<DomainLabel>& domains,
                         const GroundTruth& truth) {
    const auto resolved = resolve_truth(truth, vocab, counts);
    denominator_ = resolved.denominator();
    const auto lex = lexical_ranks(vocab);
    for (const auto& p : candidate_pairs(counts, domains))
        entries_.push_back({counts.pair(p.consequent, p.antecedent), counts.unary(p.antecedent), lex[p.consequent],
                            lex[p.antecedent], resolved.contains(p)});
}

std::size_t RankingTask::true_positives_at(const EstimatorSpec& spec, std::size_t k) const {
    validate(spec);
    struct Scored {
        Score score;
        const Entry* e;
    };
    std::vector<Scored> scored;
    scored.reserve(entries_.size());
    for (const auto& e : entries_) scored.push_back({score_from_counts(spec, e.cxy, e.cy), &e});
    const auto before = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.e->cxy != b.e->cxy) return a.e->cxy > b.e->cxy;
        if (a.e->lex_x != b.e->lex_x) return a.e->lex_x < b.e->lex_x;
        return a.e->lex_y < b.e->lex_y;
    };
    const std::size_t limit = std::min(k, scored.size());
    if (limit < scored.size()) std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(limit), scored.end(), before);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < limit; ++i) hits += scored[i].e->is_true ? 1 : 0;
    return hits;
}

double RankingTask::recall_at(const EstimatorSpec& spec, std::size_t k) const {
    if (denominator_ == 0) throw InvalidArgument("no evaluable true rules");
    return static_cast<double>(true_positives_at(spec, k)) / static_cast<double>(denominator_);
}

}  // namespace ratiorules
