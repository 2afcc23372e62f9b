// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cli.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ratiorules/direct_estimation.hpp"
#include "ratiorules/estimators.hpp"
#include "ratiorules/evaluation.hpp"
#include "ratiorules/stats.hpp"
#include "ratiorules/synth_corpus.hpp"
#include "ratiorules/tuning.hpp"

using namespace ratiorules;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Random database from std::mt19937, independent of the library's generator.
TransactionDatabase mt_database(std::mt19937& rng, std::size_t max_items, std::size_t max_records) {
    const auto v = std::uniform_int_distribution<std::size_t>(1, max_items)(rng);
    const auto n = std::uniform_int_distribution<std::size_t>(1, max_records)(rng);
    const double rate = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < v; ++i) names.push_back("w" + std::to_string(i));
    TransactionDatabase db;
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::string_view> tokens;
        for (std::size_t i = 0; i < v; ++i)
            if (std::bernoulli_distribution(rate)(rng)) tokens.push_back(names[i]);
        db.add_record(tokens, {});
    }
    return db;
}

void criterion_optimizer() {
    const auto t0 = Clock::now();
    std::mt19937 rng(20240611);
    double discrepancy = 0.0, gradient = 0.0;
    std::size_t solves = 0;
    const std::size_t trials = 100;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto counts = count(mt_database(rng, 8, 50));
        for (double lambda : {0.5, 1.0, 5.0}) {
            const CostConfig<double> cfg{lambda};
            const auto exact = analytic_solution(counts, cfg);
            const auto numeric = numeric_minimizer(counts, cfg, 1e-10);
            if (exact.size() > 0)
                discrepancy = std::max(discrepancy, (exact.values() - numeric.values()).cwiseAbs().maxCoeff());
            gradient = std::max(gradient, objective_gradient(exact, counts, cfg).max_abs());
            ++solves;
        }
    }
    const double secs = seconds_since(t0);
    report(1, discrepancy <= 1e-6 && gradient <= 1e-12 && secs < 30.0, "optimizer correctness",
           std::to_string(trials) + " databases, " + std::to_string(solves) + " solves, max |analytic-numeric| = " +
               fmt("%.3e", discrepancy) + " (<= 1e-6), max |gradient| = " + fmt("%.3e", gradient) +
               " (<= 1e-12), " + fmt("%.2f", secs) + " s (< 30)");
}

void criterion_gradient() {
    std::mt19937 rng(777);
    const double h = 1e-6;
    std::size_t triples = 0, components = 0;
    double worst = 0.0;
    while (triples < 60) {
        const auto counts = count(mt_database(rng, 6, 40));
        const auto support = observed_support(counts);
        if (support.empty()) continue;
        Vector<double> v(static_cast<Eigen::Index>(support.size()));
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = std::uniform_real_distribution<double>(0.01, 2.0)(rng);
        const AlphaVector<double> alpha(support, v);
        const CostConfig<double> cfg{std::uniform_real_distribution<double>(0.0, 10.0)(rng)};
        const auto g = objective_gradient(alpha, counts, cfg);
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            if (v(k) <= h) continue;
            Vector<double> up = v, down = v;
            up(k) += h;
            down(k) -= h;
            const double fd = (regularized_objective(AlphaVector<double>(support, up), counts, cfg) -
                               regularized_objective(AlphaVector<double>(support, down), counts, cfg)) /
                              (2.0 * h);
            const double an = g.values()(k);
            // Relative error, with an absolute floor for components that vanish.
            worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
            ++components;
        }
        ++triples;
    }
    report(2, worst <= 1e-5, "gradient check",
           std::to_string(triples) + " (alpha, counts, lambda) triples, " + std::to_string(components) +
               " components, max relative error = " + fmt("%.3e", worst) + " (<= 1e-5)");
}

void criterion_reductions() {
    std::size_t cells = 0, mismatches = 0;
    for (Count cy = 1; cy <= 20; ++cy)
        for (Count cxy = 0; cxy <= cy; ++cxy) {
            const double mle = score_from_counts(Mle{}, cxy, cy);
            mismatches += score_from_counts(Proposed{0.0}, cxy, cy) != mle;
            mismatches += score_from_counts(AdditiveSmoothing{0.0, 2}, cxy, cy) != mle;
            mismatches += score_from_counts(AdditiveSmoothing{1.0, 2}, cxy, cy) !=
                          score_from_counts(BetaPosterior{1.0, 1.0}, cxy, cy);
            if (cxy >= 1) mismatches += score_from_counts(AprioriMle{0}, cxy, cy) != mle;
            ++cells;
        }
    report(3, mismatches == 0, "exact reductions",
           std::to_string(cells) + " grid cells C(x,y) <= C(y) <= 20, " + std::to_string(mismatches) +
               " bitwise mismatches");
}

struct Fixture {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return columns[i];
        throw std::runtime_error("fixture column missing: " + name);
    }
};

Fixture load_fixture() {
    std::ifstream in(std::string(RATIORULES_DATA_DIR) + "/table3.csv");
    if (!in) throw std::runtime_error("cannot open table3.csv");
    Fixture f;
    std::string line, cell;
    std::getline(in, line);
    std::stringstream hs(line);
    while (std::getline(hs, cell, ',')) f.header.push_back(cell);
    f.columns.resize(f.header.size());
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        for (std::size_t i = 0; std::getline(ss, cell, ','); ++i)
            if (i > 0) f.columns[i].push_back(std::stod(cell));
    }
    return f;
}

void criterion_footer(const Fixture& f) {
    const auto s = summary(f.col("proposed_top4000"));
    const bool pass = std::abs(s.mean - 0.4495) <= 0.0005 && std::abs(s.sd - 0.0472) <= 0.0005;
    report(4, pass, "table footer reproduction",
           "Proposed TOP-4000 mean = " + fmt("%.5f", s.mean) + " (0.4495 +- 0.0005), sample sd = " + fmt("%.5f", s.sd) +
               " (0.0472 +- 0.0005)");
}

void criterion_significance(const Fixture& f) {
    auto p = [&](const char* b, const char* cond) {
        return paired_ttest_one_sided(
                   PairedSamples(f.col(std::string("proposed_") + cond), f.col(std::string(b) + "_" + cond)))
            .p;
    };
    const double a4 = p("apriori", "top4000"), a12 = p("apriori", "top12000");
    const double s4 = p("additive", "top4000"), s12 = p("additive", "top12000");
    const bool pass = a4 <= 0.0005 && a12 <= 0.005 && s4 < 1e-4 && s12 < 1e-4;
    report(5, pass, "significance reproduction",
           "vs Apriori p = " + fmt("%.3e", a4) + " (TOP-4000, <= 5e-4), " + fmt("%.3e", a12) +
               " (TOP-12000, <= 5e-3); vs Additive p = " + fmt("%.3e", s4) + ", " + fmt("%.3e", s12) + " (< 1e-4)");
}

void criterion_evaluation() {
    std::mt19937 rng(4242);
    std::size_t instances = 0, mismatches = 0, non_monotone = 0;
    while (instances < 120) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 80)(rng);
        RankedRules ranked;
        for (std::size_t i = 0; i < n; ++i)
            ranked.push_back({i + 1, static_cast<ItemId>(i), static_cast<ItemId>(500 + i % 7), 1.0 - double(i) / double(n), 1, 1});
        std::shuffle(ranked.begin(), ranked.end(), rng);
        for (std::size_t i = 0; i < n; ++i) ranked[i].rank = i + 1;

        std::vector<RulePair> truth_list;
        ResolvedTruth truth;
        for (const auto& r : ranked)
            if (std::bernoulli_distribution(0.35)(rng)) truth_list.push_back({r.consequent, r.antecedent});
        for (std::size_t m = std::uniform_int_distribution<std::size_t>(0, 4)(rng); m > 0; --m)
            truth_list.push_back({static_cast<ItemId>(9000 + m), 1});
        if (truth_list.empty()) continue;
        for (const auto& t : truth_list) truth.pairs.insert(t);

        for (std::size_t k = 0; k <= n + 2; ++k) {
            std::size_t tp = 0;
            for (std::size_t i = 0; i < std::min(k, n); ++i)
                for (const auto& t : truth_list)
                    if (ranked[i].consequent == t.consequent && ranked[i].antecedent == t.antecedent) ++tp;
            mismatches += recall_at(ranked, truth, k) != double(tp) / double(truth_list.size());
            if (k > 0) mismatches += precision_at(ranked, truth, k) != double(tp) / double(k);
        }
        const auto c = curve(ranked, truth, std::uniform_int_distribution<std::size_t>(1, 9)(rng));
        for (std::size_t i = 1; i < c.points.size(); ++i) non_monotone += c.points[i].recall < c.points[i - 1].recall;
        ++instances;
    }
    report(6, mismatches == 0 && non_monotone == 0, "evaluation oracle",
           std::to_string(instances) + " instances, " + std::to_string(mismatches) + " mismatches vs nested loop, " +
               std::to_string(non_monotone) + " curve decreases");
}

struct SeedResult {
    double proposed = 0.0, apriori = 0.0, additive = 0.0;
    double lambda = 0.0, theta = 0.0;
};

SeedResult run_seed(std::size_t s, std::size_t K) {
    SynthConfig train_cfg;  // acceptance regime = library defaults
    train_cfg.seed = 1000 + 2 * s;
    SynthConfig test_cfg = train_cfg;
    test_cfg.seed = 1001 + 2 * s;
    const auto train = generate(train_cfg);
    const auto test = generate(test_cfg);
    const auto train_db = train.to_database();
    const auto test_db = test.to_database();
    const auto train_counts = count(train_db);
    const auto test_counts = count(test_db);
    const RankingTask task(train_counts, train_db.vocab(), train_db.domains(), train.truth);
    SeedResult r;
    auto held_out = [&](const EstimatorSpec& base, double* param) {
        const auto outcome = tune(base, task, K);
        if (param) *param = outcome.parameter;
        return apply_prior_period(outcome, test_counts, test_db.vocab(), test_db.domains(), test.truth, {K}).front();
    };
    r.proposed = held_out(Proposed{}, &r.lambda);
    r.apriori = held_out(AprioriMle{}, &r.theta);
    r.additive = held_out(AdditiveSmoothing{}, nullptr);
    return r;
}

void criterion_synthetic() {
    const auto t0 = Clock::now();
    const std::size_t seeds = 10, K = 2000;
    const SynthConfig regime;
    std::vector<SeedResult> results(seeds);
    {
        std::vector<std::jthread> workers;
        const unsigned n_threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 5));
        for (unsigned w = 0; w < n_threads; ++w)
            workers.emplace_back([&, w] {
                for (std::size_t s = w; s < seeds; s += n_threads) results[s] = run_seed(s, K);
            });
    }
    std::vector<double> p, a, add;
    for (const auto& r : results) {
        p.push_back(r.proposed);
        a.push_back(r.apriori);
        add.push_back(r.additive);
    }
    const double mp = summary(p).mean, ma = summary(a).mean, madd = summary(add).mean;
    double pval = 1.0;
    std::string note;
    try {
        pval = paired_ttest_one_sided(PairedSamples(p, a)).p;
    } catch (const ZeroVariance&) {
        note = " (zero-variance differences)";
    }
    const double secs = seconds_since(t0);
    const bool regime_ok = regime.p_place_mention <= 0.05 && regime.ambiguity_rate >= 0.2 && regime.n_records >= 20000;
    const bool pass = regime_ok && mp >= ma && pval < 0.05 && secs < 300.0;
    report(7, pass, "synthetic trend",
           std::to_string(seeds) + " seeds, K = " + std::to_string(K) + ", mean recall Proposed = " + fmt("%.4f", mp) +
               ", Apriori = " + fmt("%.4f", ma) + ", Additive = " + fmt("%.4f", madd) + ", one-sided p = " +
               fmt("%.3e", pval) + " (< 0.05)" + note + ", " + fmt("%.1f", secs) + " s (< 300)");
}

int cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"ratiorules"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in;
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
    if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void criterion_determinism() {
    // Both runs use the same paths, so their manifests are identical too;
    // the first run's outputs are moved aside before the second.
    const fs::path root = fs::temp_directory_path() / "ratiorules_acceptance_det";
    fs::remove_all(root);
    const std::string d = (root / "work").string();
    const std::vector<std::string> outputs{"ranked.tsv", "curve.csv", "ranked.tsv.manifest.json", "curve.csv.manifest.json"};
    bool ok = true;
    for (const char* run : {"first", "second"}) {
        fs::remove_all(d);
        ok = ok && cli({"synth", "--out", d + "/corpus", "--seed", "77", "--threads", "4"}) == 0;
        ok = ok && cli({"count", "--records", d + "/corpus/records.txt", "--threads", "4", "--out", d + "/counts.tsv"}) == 0;
        ok = ok && cli({"rank", "--counts", d + "/counts.tsv", "--domains", d + "/corpus/domains.tsv", "--estimator",
                        "proposed", "--lambda", "3.25", "--out", d + "/ranked.tsv"}) == 0;
        ok = ok && cli({"curve", "--ranked", d + "/ranked.tsv", "--counts", d + "/counts.tsv", "--truth",
                        d + "/corpus/truth.tsv", "--step", "100", "--out", d + "/curve.csv"}) == 0;
        fs::create_directories(root / run);
        for (const auto& f : outputs)
            if (fs::exists(fs::path(d) / f)) fs::copy_file(fs::path(d) / f, root / run / f);
    }
    std::size_t bytes = 0;
    bool same = ok;
    for (const auto& f : outputs) {
        const auto x = slurp(root / "first" / f), y = slurp(root / "second" / f);
        same = same && !x.empty() && x == y;
        bytes += x.size();
    }
    fs::remove_all(root);
    report(8, same, "determinism",
           std::string("two runs (synth and count on 4 threads) with identical manifests, ranked TSV + curve CSV: ") +
               (same ? "byte-identical" : "differ") + " (" + std::to_string(bytes) + " bytes compared)");
}

}  // namespace

int main() {
    try {
        criterion_optimizer();
        criterion_gradient();
        criterion_reductions();
        const auto fixture = load_fixture();
        criterion_footer(fixture);
        criterion_significance(fixture);
        criterion_evaluation();
        criterion_synthetic();
        criterion_determinism();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
