#include "ratiorules/estimators.hpp"

#include <cmath>
#include <sstream>

#include "ratiorules/errors.hpp"
#include "text_util.hpp"

namespace ratiorules {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double ratio_or_throw(Count cxy, Count cy, const char* family) {
    if (cy == 0) throw UndefinedRatio(std::string(family) + ": C(y) = 0");
    return static_cast<double>(cxy) / static_cast<double>(cy);
}

}  // namespace

Family family_of(const EstimatorSpec& spec) noexcept {
    return std::visit(Overloaded{
                          [](const Proposed&) { return Family::proposed; },
                          [](const AprioriMle&) { return Family::apriori; },
                          [](const AdditiveSmoothing&) { return Family::additive; },
                          [](const BetaPosterior&) { return Family::beta; },
                          [](const Mle&) { return Family::mle; },
                      },
                      spec);
}

Family parse_family(std::string_view name) {
    if (name == "proposed") return Family::proposed;
    if (name == "apriori") return Family::apriori;
    if (name == "additive") return Family::additive;
    if (name == "beta") return Family::beta;
    if (name == "mle") return Family::mle;
    throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
}

std::string_view to_string(Family family) noexcept {
    switch (family) {
        case Family::proposed: return "proposed";
        case Family::apriori: return "apriori";
        case Family::additive: return "additive";
        case Family::beta: return "beta";
        case Family::mle: break;
    }
    return "mle";
}

std::string describe(const EstimatorSpec& spec) {
    using detail::shortest;
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const Proposed& p) { os << "proposed lambda=" << shortest(p.lambda); },
                   [&](const AprioriMle& p) { os << "apriori theta=" << p.theta; },
                   [&](const AdditiveSmoothing& p) { os << "additive mu=" << shortest(p.mu) << " classes=" << p.classes; },
                   [&](const BetaPosterior& p) { os << "beta alpha=" << shortest(p.alpha) << " beta=" << shortest(p.beta); },
                   [&](const Mle&) { os << "mle"; },
               },
               spec);
    return os.str();
}

void validate(const EstimatorSpec& spec) {
    std::visit(Overloaded{
                   [](const Proposed& p) {
                       if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
                           throw InvalidArgument("proposed: lambda must be finite and >= 0");
                   },
                   [](const AprioriMle&) {},
                   [](const AdditiveSmoothing& p) {
                       if (!(p.mu >= 0.0) || !std::isfinite(p.mu))
                           throw InvalidArgument("additive: mu must be finite and >= 0");
                       if (p.classes < 1) throw InvalidArgument("additive: classes must be >= 1");
                   },
                   [](const BetaPosterior& p) {
                       if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !std::isfinite(p.alpha) || !std::isfinite(p.beta))
                           throw InvalidArgument("beta: alpha and beta must be finite and > 0");
                   },
                   [](const Mle&) {},
               },
               spec);
}

bool has_tunable_parameter(Family family) noexcept {
    return family == Family::proposed || family == Family::apriori || family == Family::additive;
}

double tunable_parameter(const EstimatorSpec& spec) {
    if (auto* p = std::get_if<Proposed>(&spec)) return p->lambda;
    if (auto* p = std::get_if<AprioriMle>(&spec)) return static_cast<double>(p->theta);
    if (auto* p = std::get_if<AdditiveSmoothing>(&spec)) return p->mu;
    throw InvalidArgument(std::string(to_string(family_of(spec))) + " has no tunable parameter");
}

EstimatorSpec with_tunable_parameter(const EstimatorSpec& base, double value) {
    EstimatorSpec out = base;
    if (auto* p = std::get_if<Proposed>(&out)) {
        p->lambda = value;
    } else if (auto* p = std::get_if<AprioriMle>(&out)) {
        if (!(value >= 0.0) || value > 1e18) throw InvalidArgument("apriori: theta must be >= 0");
        p->theta = static_cast<Count>(value);
    } else if (auto* p = std::get_if<AdditiveSmoothing>(&out)) {
        p->mu = value;
    } else {
        throw InvalidArgument(std::string(to_string(family_of(base))) + " has no tunable parameter");
    }
    validate(out);
    return out;
}

Score score_from_counts(const EstimatorSpec& spec, Count cxy, Count cy) {
    if (cxy > cy) throw InvalidArgument("C(x,y) exceeds C(y)");
    const double c_xy = static_cast<double>(cxy);
    const double c_y = static_cast<double>(cy);
    return std::visit(Overloaded{
                          [&](const Proposed& p) -> double {
                              if (cy == 0 && p.lambda == 0.0) throw UndefinedRatio("proposed: lambda = 0 and C(y) = 0");
                              return c_xy / (c_y + p.lambda);
                          },
                          [&](const AprioriMle& p) -> double {
                              const double r = ratio_or_throw(cxy, cy, "apriori");
                              return cxy > p.theta ? r : 0.0;
                          },
                          [&](const AdditiveSmoothing& p) -> double {
                              const double denom = c_y + p.mu * static_cast<double>(p.classes);
                              if (denom == 0.0) throw UndefinedRatio("additive: mu = 0 and C(y) = 0");
                              return (c_xy + p.mu) / denom;
                          },
                          [&](const BetaPosterior& p) -> double { return (c_xy + p.alpha) / (c_y + p.alpha + p.beta); },
                          [&](const Mle&) -> double { return ratio_or_throw(cxy, cy, "mle"); },
                      },
                      spec);
}

Score score(const EstimatorSpec& spec, const CooccurrenceCounts& counts, ItemId x, ItemId y) {
    validate(spec);
    return score_from_counts(spec, counts.pair(x, y), counts.unary(y));
}

ScoreMap score_all(const EstimatorSpec& spec, const CooccurrenceCounts& counts, const PairSet& candidates) {
    validate(spec);
    ScoreMap out;
    out.reserve(candidates.size());
    for (const auto& p : candidates) {
        try {
            out.emplace(p, score_from_counts(spec, counts.pair(p.consequent, p.antecedent), counts.unary(p.antecedent)));
        } catch (const UndefinedRatio& e) {
            throw UndefinedRatio(std::string(e.what()) + " at pair (" + std::to_string(p.consequent) + ", " +
                                 std::to_string(p.antecedent) + ")");
        }
    }
    return out;
}

}  // namespace ratiorules
