#include "ratiorules/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ratiorules/errors.hpp"
#include "text_util.hpp"

namespace ratiorules {

std::vector<double> grid_points(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidArgument("grid requires lo <= hi and step > 0");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

TuningOutcome tune(const EstimatorSpec& base, const RankingTask& task, std::size_t k, const SearchConfig& search) {
    validate(base);
    const Family family = family_of(base);
    if (!has_tunable_parameter(family)) throw InvalidArgument(std::string(to_string(family)) + " has no tunable parameter");
    if (k == 0) throw InvalidArgument("k must be >= 1");
    if (task.candidate_count() == 0) throw InvalidArgument("empty candidate set");
    if (task.denominator() == 0) throw InvalidArgument("no evaluable true rules");

    TuningOutcome out;
    out.k = k;
    auto evaluate = [&](double p) {
        const double r = task.recall_at(with_tunable_parameter(base, p), k);
        out.trace.emplace_back(p, r);
        return r;
    };
    auto best_in_trace = [&out] {
        auto best = out.trace.front();
        for (const auto& [p, r] : out.trace)
            if (r > best.second || (r == best.second && p < best.first)) best = {p, r};
        return best;
    };

    if (family == Family::apriori) {
        for (Count theta = 0; theta <= search.theta_max; ++theta) evaluate(static_cast<double>(theta));
    } else {
        if (!(search.grid_lo >= 0.0)) throw InvalidArgument("grid must start at >= 0");
        for (double p : grid_points(search.grid_lo, search.grid_hi, search.grid_step)) evaluate(p);
        const double centre = best_in_trace().first;
        if (search.refine_step > 0.0 && search.refine_step < search.grid_step) {
            const auto steps = static_cast<long>(std::floor(search.grid_step / search.refine_step + 1e-9));
            for (long j = -steps; j <= steps; ++j) {
                if (j == 0) continue;
                const double p = centre + static_cast<double>(j) * search.refine_step;
                if (p < search.grid_lo || p > search.grid_hi) continue;
                evaluate(p);
            }
        }
    }
    const auto [param, recall] = best_in_trace();
    out.parameter = param;
    out.recall = recall;
    out.spec = with_tunable_parameter(base, param);
    return out;
}

std::vector<double> apply_prior_period(const TuningOutcome& outcome, const CooccurrenceCounts& test_counts,
                                       const Vocabulary& vocab, const std::vector<DomainLabel>& domains,
                                       const GroundTruth& truth, const std::vector<std::size_t>& ks) {
    std::vector<double> out;
    if (ks.empty()) return out;
    const auto resolved = resolve_truth(truth, vocab, test_counts);
    const auto ranked = rank(score_all(outcome.spec, test_counts, candidate_pairs(test_counts, domains)), test_counts, vocab);
    out.reserve(ks.size());
    for (auto k : ks) out.push_back(recall_at(ranked, resolved, k));
    return out;
}

void write_outcome(std::ostream& out, const TuningOutcome& o) {
    using detail::shortest;
    std::ostringstream os;
    const Family f = family_of(o.spec);
    os << "family=" << to_string(f) << '\n';
    os << "parameter=" << shortest(o.parameter) << '\n';
    if (auto* p = std::get_if<AdditiveSmoothing>(&o.spec)) os << "classes=" << p->classes << '\n';
    os << "k=" << o.k << '\n';
    os << "recall=" << shortest(o.recall) << '\n';
    os << "evaluations=" << o.trace.size() << '\n';
    out << os.str();
}

TuningOutcome read_outcome(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("expected key=value", line_number);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&kv](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError(std::string("outcome missing '") + key + "'", 0);
        return it->second;
    };
    try {
        TuningOutcome o;
        const Family f = parse_family(need("family"));
        EstimatorSpec base;
        switch (f) {
            case Family::proposed: base = Proposed{}; break;
            case Family::apriori: base = AprioriMle{}; break;
            case Family::additive: {
                AdditiveSmoothing a;
                if (kv.count("classes")) a.classes = std::stoull(kv["classes"]);
                base = a;
                break;
            }
            default: throw FormatError("outcome family has no tunable parameter", 0);
        }
        o.parameter = std::stod(need("parameter"));
        o.spec = with_tunable_parameter(base, o.parameter);
        o.k = std::stoull(need("k"));
        o.recall = std::stod(need("recall"));
        return o;
    } catch (const std::logic_error&) {
        throw FormatError("bad numeric value in outcome file", 0);
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what(), 0);
    }
}

}  // namespace ratiorules
