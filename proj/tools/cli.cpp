#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ratiorules/errors.hpp"
#include "ratiorules/estimators.hpp"
#include "ratiorules/evaluation.hpp"
#include "ratiorules/optimizer_check.hpp"
#include "ratiorules/stats.hpp"
#include "ratiorules/synth_corpus.hpp"
#include "ratiorules/transaction_store.hpp"
#include "ratiorules/tuning.hpp"

namespace ratiorules::cli {

namespace {

namespace fs = std::filesystem;

/// Bad invocation: unknown/missing flags, unreadable files, bad values.
class UsageFailure : public Error {
public:
    using Error::Error;
};

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\t' || c == '\r') c = ' ';
    return s;
}

std::string fmt_double(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

/// Opens `path` for reading, `-` meaning the caller's stdin.
class Input {
public:
    Input(const std::string& path, std::istream& stdin_stream) {
        if (path == "-") {
            stream_ = &stdin_stream;
            return;
        }
        file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
        if (!*file_) throw UsageFailure("cannot open '" + path + "'");
        stream_ = file_.get();
    }
    std::istream& get() { return *stream_; }

private:
    std::unique_ptr<std::ifstream> file_;
    std::istream* stream_ = nullptr;
};

class Output {
public:
    Output(const std::string& path, std::ostream& stdout_stream) {
        if (path == "-") {
            stream_ = &stdout_stream;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw UsageFailure("cannot write '" + path + "'");
        stream_ = file_.get();
    }
    std::ostream& get() { return *stream_; }
    void close() {
        stream_->flush();
        if (file_) file_->close();
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

/// Everything needed to reproduce one invocation.
struct RunManifest {
    std::string subcommand;
    nlohmann::json flags = nlohmann::json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::optional<std::string> estimator;
    std::optional<std::uint64_t> seed;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["subcommand"] = subcommand;
        j["flags"] = flags;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["estimator"] = estimator ? nlohmann::json(*estimator) : nlohmann::json(nullptr);
        j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
        j["format"] = "ratiorules-manifest-v1";
        return j;
    }
};

void capture_flags(const CLI::App& sub, RunManifest& manifest) {
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt == sub.get_help_ptr()) continue;
        const std::string name = opt->get_name(false, true);
        if (name == "--manifest") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& results = opt->results();
            for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
            if (results.empty()) value = "true";
        } else {
            value = opt->get_default_str();
        }
        manifest.flags[name] = value;
    }
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageFailure("cannot write manifest '" + path + "'");
    out << manifest.to_json().dump(2) << '\n';
}

std::string default_manifest_path(const std::string& explicit_path, const std::string& output) {
    if (!explicit_path.empty()) return explicit_path;
    if (output.empty() || output == "-") return {};
    return output + ".manifest.json";
}

// ---- estimator flags -------------------------------------------------------

struct EstimatorFlags {
    std::string name;
    double lambda = 0.0;
    Count theta = 0;
    double mu = 0.0;
    Count classes = 2;
    double alpha = 1.0;
    double beta = 1.0;
    CLI::Option* lambda_opt = nullptr;
    CLI::Option* theta_opt = nullptr;
    CLI::Option* mu_opt = nullptr;
};

void add_estimator_flags(CLI::App& sub, EstimatorFlags& f, bool parameter_flags) {
    sub.add_option("--estimator", f.name, "proposed | apriori | additive | beta | mle")->required();
    if (parameter_flags) {
        f.lambda_opt = sub.add_option("--lambda", f.lambda, "proposed: regularization weight (>= 0)");
        f.theta_opt = sub.add_option("--theta", f.theta, "apriori: minimum support, rule kept when C(x,y) > theta");
        f.mu_opt = sub.add_option("--mu", f.mu, "additive: smoothing strength (>= 0)");
    }
    sub.add_option("--classes", f.classes, "additive: number of classes B")->capture_default_str();
    sub.add_option("--alpha", f.alpha, "beta: prior alpha (> 0)")->capture_default_str();
    sub.add_option("--beta", f.beta, "beta: prior beta (> 0)")->capture_default_str();
}

EstimatorSpec build_spec(const EstimatorFlags& f, bool require_parameter) {
    Family family;
    try {
        family = parse_family(f.name);
    } catch (const InvalidArgument& e) {
        throw UsageFailure(e.what());
    }
    auto need = [&](CLI::Option* opt, const char* flag) {
        if (require_parameter && (opt == nullptr || opt->count() == 0))
            throw UsageFailure(std::string("--estimator ") + f.name + " requires " + flag);
    };
    EstimatorSpec spec;
    switch (family) {
        case Family::proposed:
            need(f.lambda_opt, "--lambda");
            spec = Proposed{f.lambda};
            break;
        case Family::apriori:
            need(f.theta_opt, "--theta");
            spec = AprioriMle{f.theta};
            break;
        case Family::additive:
            need(f.mu_opt, "--mu");
            spec = AdditiveSmoothing{f.mu, f.classes};
            break;
        case Family::beta: spec = BetaPosterior{f.alpha, f.beta}; break;
        case Family::mle: spec = Mle{}; break;
    }
    try {
        validate(spec);
    } catch (const InvalidArgument& e) {
        throw UsageFailure(e.what());
    }
    return spec;
}

// ---- corpus loading ----------------------------------------------------------

struct Corpus {
    Vocabulary vocab;
    std::vector<DomainLabel> domains;
    CooccurrenceCounts counts;
};

DomainTable load_domains(const std::string& path, std::istream& in) {
    if (path.empty()) return {};
    Input input(path, in);
    return read_domain_table(input.get());
}

/// From `--counts` (plus optional domains) or from `--records`.
Corpus load_corpus(const std::string& counts_path, const std::string& records_path, const std::string& domains_path,
                   unsigned threads, std::istream& in, RunManifest& manifest) {
    if (counts_path.empty() == records_path.empty()) throw UsageFailure("give exactly one of --counts or --records");
    const DomainTable table = load_domains(domains_path, in);
    if (!domains_path.empty()) manifest.inputs.push_back(domains_path);
    Corpus corpus;
    if (!counts_path.empty()) {
        manifest.inputs.push_back(counts_path);
        Input input(counts_path, in);
        auto loaded = read_counts(input.get());
        corpus.vocab = std::move(loaded.vocab);
        corpus.counts = std::move(loaded.counts);
        corpus.domains = resolve_domains(corpus.vocab, table);
    } else {
        manifest.inputs.push_back(records_path);
        Input input(records_path, in);
        auto counted = count_stream(input.get(), table, threads);
        corpus.vocab = std::move(counted.vocab);
        corpus.domains = std::move(counted.domains);
        corpus.counts = std::move(counted.counts);
    }
    return corpus;
}

struct DatasetDir {
    std::string records;
    std::string domains;
    std::string truth;
};

DatasetDir dataset_paths(const std::string& dir, const std::string& truth_override) {
    const fs::path base(dir);
    DatasetDir d{(base / "records.txt").string(), (base / "domains.tsv").string(), (base / "truth.tsv").string()};
    if (!truth_override.empty()) d.truth = truth_override;
    return d;
}

GroundTruth load_truth(const std::string& path, std::istream& in) {
    Input input(path, in);
    return read_ground_truth(input.get());
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(piece, &used));
            if (used != piece.size()) throw std::invalid_argument(piece);
        } catch (const std::logic_error&) {
            throw UsageFailure("bad --grid '" + text + "', expected lo:hi:step");
        }
    }
    if (parts.size() != 3) throw UsageFailure("bad --grid '" + text + "', expected lo:hi:step");
    return parts;
}

// ---- CSV fixtures --------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw UsageFailure("fixture has no column '" + name + "'");
    }
};

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    std::size_t line_number = 0;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!l.empty() && l.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) throw FormatError("row width differs from header", line_number);
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw FormatError("empty fixture", 0);
    return t;
}

double parse_real(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("bad number '" + s + "'", 0);
    }
}

// ---- subcommands -----------------------------------------------------------------

struct Streams {
    std::istream& in;
    std::ostream& out;
};

struct SynthArgs {
    std::string config, out, manifest;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

void run_synth(const SynthArgs& a, const CLI::App& sub, Streams, RunManifest& m) {
    SynthConfig cfg;
    if (!a.config.empty()) {
        std::ifstream in(a.config, std::ios::binary);
        if (!in) throw UsageFailure("cannot open '" + a.config + "'");
        try {
            cfg = read_synth_config(in);
        } catch (const InvalidArgument& e) {
            throw UsageFailure(e.what());
        }
        m.inputs.push_back(a.config);
    }
    if (a.seed) cfg.seed = *a.seed;
    try {
        validate(cfg);
    } catch (const InvalidArgument& e) {
        throw UsageFailure(e.what());
    }
    const auto corpus = a.threads > 1 ? generate_parallel(cfg, a.threads) : generate(cfg);
    write_corpus(a.out, corpus);
    {
        std::ofstream cfg_out(fs::path(a.out) / "config.toml", std::ios::binary);
        write_synth_config(cfg_out, cfg);
    }
    m.seed = cfg.seed;
    for (const char* f : {"records.txt", "domains.tsv", "truth.tsv", "config.toml"}) m.outputs.push_back((fs::path(a.out) / f).string());
    capture_flags(sub, m);
    write_manifest(m, a.manifest.empty() ? (fs::path(a.out) / "manifest.json").string() : a.manifest);
}

struct CountArgs {
    std::string records = "-", domains, out = "-", manifest;
    unsigned threads = 1;
};

void run_count(const CountArgs& a, const CLI::App& sub, Streams s, RunManifest& m) {
    const DomainTable table = load_domains(a.domains, s.in);
    Input input(a.records, s.in);
    const auto corpus = count_stream(input.get(), table, a.threads);
    Output out(a.out, s.out);
    write_counts(out.get(), corpus.counts, corpus.vocab);
    out.close();
    m.inputs = {a.records};
    if (!a.domains.empty()) m.inputs.push_back(a.domains);
    m.outputs = {a.out};
    capture_flags(sub, m);
    if (auto p = default_manifest_path(a.manifest, a.out); !p.empty()) write_manifest(m, p);
}

struct RankArgs {
    std::string counts, records, domains, out = "-", manifest;
    unsigned threads = 1;
    EstimatorFlags est;
};

void run_rank(const RankArgs& a, const CLI::App& sub, Streams s, RunManifest& m) {
    const auto spec = build_spec(a.est, true);
    const auto corpus = load_corpus(a.counts, a.records, a.domains, a.threads, s.in, m);
    const auto scores = score_all(spec, corpus.counts, candidate_pairs(corpus.counts, corpus.domains));
    const auto ranked = rank(scores, corpus.counts, corpus.vocab);
    Output out(a.out, s.out);
    write_ranked(out.get(), ranked, corpus.vocab);
    out.close();
    m.estimator = describe(spec);
    m.outputs = {a.out};
    capture_flags(sub, m);
    if (auto p = default_manifest_path(a.manifest, a.out); !p.empty()) write_manifest(m, p);
}

struct EvalArgs {
    std::string ranked, counts, records, domains, truth, params, test, out = "-", manifest;
    std::vector<std::size_t> ks{1000, 4000, 12000};
    unsigned threads = 1;
};

void run_eval(const EvalArgs& a, const CLI::App& sub, Streams s, RunManifest& m) {
    Output out(a.out, s.out);
    if (!a.params.empty()) {
        if (a.test.empty()) throw UsageFailure("--params requires --test DIR");
        if (!a.ranked.empty()) throw UsageFailure("--params and --ranked are exclusive");
        TuningOutcome outcome;
        {
            Input in(a.params, s.in);
            outcome = read_outcome(in.get());
        }
        const auto paths = dataset_paths(a.test, a.truth);
        const auto corpus = load_corpus("", paths.records, paths.domains, a.threads, s.in, m);
        const auto truth = load_truth(paths.truth, s.in);
        const auto recalls = apply_prior_period(outcome, corpus.counts, corpus.vocab, corpus.domains, truth, a.ks);
        out.get() << "k\trecall\n";
        for (std::size_t i = 0; i < a.ks.size(); ++i) out.get() << a.ks[i] << '\t' << fmt_double(recalls[i]) << '\n';
        m.inputs.insert(m.inputs.begin(), a.params);
        m.inputs.push_back(paths.truth);
        m.estimator = describe(outcome.spec);
    } else {
        if (a.ranked.empty() || a.truth.empty()) throw UsageFailure("eval needs --ranked and --truth (or --params and --test)");
        const auto corpus = load_corpus(a.counts, a.records, a.domains, a.threads, s.in, m);
        RankedRules ranked;
        {
            Input in(a.ranked, s.in);
            ranked = read_ranked(in.get(), corpus.vocab);
        }
        const auto truth = resolve_truth(load_truth(a.truth, s.in), corpus.vocab, corpus.counts);
        out.get() << "k\trecall\tprecision\n";
        for (auto k : a.ks) {
            out.get() << k << '\t' << fmt_double(recall_at(ranked, truth, k)) << '\t'
                      << (k == 0 ? std::string("nan") : fmt_double(precision_at(ranked, truth, k))) << '\n';
        }
        m.inputs.push_back(a.ranked);
        m.inputs.push_back(a.truth);
    }
    out.close();
    m.outputs = {a.out};
    capture_flags(sub, m);
    if (auto p = default_manifest_path(a.manifest, a.out); !p.empty()) write_manifest(m, p);
}

struct CurveArgs {
    std::string ranked, counts, records, domains, truth, out = "-", manifest;
    std::size_t step = 100;
    unsigned threads = 1;
};

void run_curve(const CurveArgs& a, const CLI::App& sub, Streams s, RunManifest& m) {
    const auto corpus = load_corpus(a.counts, a.records, a.domains, a.threads, s.in, m);
    RankedRules ranked;
    {
        Input in(a.ranked, s.in);
        ranked = read_ranked(in.get(), corpus.vocab);
    }
    const auto truth = resolve_truth(load_truth(a.truth, s.in), corpus.vocab, corpus.counts);
    if (a.step == 0) throw UsageFailure("--step must be >= 1");
    const auto c = curve(ranked, truth, a.step);
    Output out(a.out, s.out);
    write_curve(out.get(), c);
    out.close();
    m.inputs.push_back(a.ranked);
    m.inputs.push_back(a.truth);
    m.outputs = {a.out};
    capture_flags(sub, m);
    if (auto p = default_manifest_path(a.manifest, a.out); !p.empty()) write_manifest(m, p);
}

struct TuneArgs {
    std::string train, truth, out = "-", manifest, grid = "0:20:0.25";
    double refine = 0.01;
    std::size_t k = 4000;
    Count theta_max = 20;
    unsigned threads = 1;
    EstimatorFlags est;
};

void run_tune(const TuneArgs& a, const CLI::App& sub, Streams s, RunManifest& m) {
    const auto base = build_spec(a.est, false);
    if (!has_tunable_parameter(family_of(base))) throw UsageFailure(a.est.name + " has no tunable parameter");
    const auto g = parse_grid(a.grid);
    SearchConfig search;
    search.grid_lo = g[0];
    search.grid_hi = g[1];
    search.grid_step = g[2];
    search.refine_step = a.refine;
    search.theta_max = a.theta_max;
    if (!(search.grid_step > 0.0) || search.grid_hi < search.grid_lo || search.grid_lo < 0.0)
        throw UsageFailure("bad --grid range");
    if (a.k == 0) throw UsageFailure("--k must be >= 1");
    const auto paths = dataset_paths(a.train, a.truth);
    const auto corpus = load_corpus("", paths.records, paths.domains, a.threads, s.in, m);
    const auto truth = load_truth(paths.truth, s.in);
    const RankingTask task(corpus.counts, corpus.vocab, corpus.domains, truth);
    const auto outcome = tune(base, task, a.k, search);
    Output out(a.out, s.out);
    write_outcome(out.get(), outcome);
    out.close();
    m.inputs.push_back(paths.truth);
    m.estimator = describe(outcome.spec);
    m.outputs = {a.out};
    capture_flags(sub, m);
    if (auto p = default_manifest_path(a.manifest, a.out); !p.empty()) write_manifest(m, p);
}

struct CompareArgs {
    std::string fixture, a = "proposed", b = "apriori", condition, label = "period", out = "-", manifest;
};

void run_compare(const CompareArgs& a, const CLI::App& sub, Streams s, RunManifest& m) {
    Table table;
    {
        Input in(a.fixture, s.in);
        table = read_csv(in.get());
    }
    const std::string suffix = a.condition.empty() ? "" : "_" + a.condition;
    const auto ca = table.column(a.a + suffix);
    const auto cb = table.column(a.b + suffix);
    std::optional<std::size_t> cl;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i] == a.label) cl = i;
    std::vector<double> va, vb;
    for (const auto& row : table.rows) {
        va.push_back(parse_real(row[ca]));
        vb.push_back(parse_real(row[cb]));
    }
    const auto result = paired_ttest_one_sided(PairedSamples(va, vb));
    const auto sa = summary(va);
    const auto sb = summary(vb);
    Output out(a.out, s.out);
    auto& o = out.get();
    o << "dataset\t" << a.a << '\t' << a.b << "\tdiff\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        o << (cl ? table.rows[i][*cl] : std::to_string(i + 1)) << '\t' << fmt_double(va[i], "%.4f") << '\t'
          << fmt_double(vb[i], "%.4f") << '\t' << fmt_double(va[i] - vb[i], "%.4f") << '\n';
    o << "mean\t" << fmt_double(sa.mean, "%.4f") << '\t' << fmt_double(sb.mean, "%.4f") << '\t'
      << fmt_double(sa.mean - sb.mean, "%.4f") << '\n';
    o << "sd\t" << fmt_double(sa.sd, "%.4f") << '\t' << fmt_double(sb.sd, "%.4f") << "\t\n";
    o << "t\t" << fmt_double(result.t, "%.6f") << '\n';
    o << "dof\t" << result.dof << '\n';
    o << "p\t" << fmt_double(result.p, "%.6e") << '\n';
    out.close();
    m.inputs = {a.fixture};
    m.outputs = {a.out};
    capture_flags(sub, m);
    if (auto p = default_manifest_path(a.manifest, a.out); !p.empty()) write_manifest(m, p);
}

struct VerifyArgs {
    std::size_t trials = 100, max_items = 8, max_records = 50;
    std::uint64_t seed = 7;
    double tol = 1e-10;
    std::string out = "-", manifest;
};

int run_verify(const VerifyArgs& a, const CLI::App& sub, Streams s, RunManifest& m) {
    OptimizerCheckConfig cfg;
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.max_items = a.max_items;
    cfg.max_records = a.max_records;
    cfg.tol = a.tol;
    if (!(cfg.tol > 0.0)) throw UsageFailure("--tol must be > 0");
    const auto report = check_optimizer(cfg);
    const bool pass = report.max_discrepancy <= 1e-6 && report.max_gradient_at_solution <= 1e-12;
    Output out(a.out, s.out);
    out.get() << "trials\t" << report.trials << '\n'
              << "solves\t" << report.solves << '\n'
              << "max_discrepancy\t" << fmt_double(report.max_discrepancy, "%.3e") << '\n'
              << "max_gradient_at_solution\t" << fmt_double(report.max_gradient_at_solution, "%.3e") << '\n'
              << "status\t" << (pass ? "pass" : "fail") << '\n';
    out.close();
    m.seed = a.seed;
    m.outputs = {a.out};
    capture_flags(sub, m);
    if (auto p = default_manifest_path(a.manifest, a.out); !p.empty()) write_manifest(m, p);
    return pass ? kOk : kRuntimeError;
}

constexpr const char* kFormats = R"(File formats:
  records      UTF-8, one record per line, whitespace-separated tokens; empty lines are empty records
  domains      token<TAB>label, label in {consequent, antecedent, other}
  counts       #counts<TAB>v1<TAB>N<TAB>n, then x<TAB>x<TAB>C(x) per item, then x<TAB>y<TAB>C(x,y)
  truth        consequent<TAB>antecedent
  ranked       rank<TAB>consequent<TAB>antecedent<TAB>score(6 dp)<TAB>cxy<TAB>cy
  curve        CSV rank,recall,precision
  outcome      key=value lines (family, parameter, classes, k, recall, evaluations)
  synth config flat key = value lines
A path of '-' means stdin/stdout. Outputs written to files get a <output>.manifest.json
unless --manifest is given. Environment variables are not consulted.)";

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rank association rules from co-occurrence counts"};
    app.footer(kFormats);
    app.require_subcommand(1);
    app.allow_windows_style_options(false);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted rules");
    synth_cmd->add_option("--config", synth.config, "Flat key = value config file");
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Overrides the config seed");
    synth_cmd->add_option("--threads", synth.threads, "Generation threads")->capture_default_str();
    synth_cmd->add_option("--manifest", synth.manifest, "Manifest path (default DIR/manifest.json)");

    CountArgs count_args;
    auto* count_cmd = app.add_subcommand("count", "Count co-occurrences of a records file");
    count_cmd->add_option("--records", count_args.records, "Records file or -")->capture_default_str();
    count_cmd->add_option("--domains", count_args.domains, "Domain table (labels are not stored in counts)");
    count_cmd->add_option("--out", count_args.out, "Counts TSV or -")->capture_default_str();
    count_cmd->add_option("--threads", count_args.threads, "Counting threads")->capture_default_str();
    count_cmd->add_option("--manifest", count_args.manifest, "Manifest path");

    RankArgs rank_args;
    auto* rank_cmd = app.add_subcommand("rank", "Score and rank candidate rules");
    rank_cmd->add_option("--counts", rank_args.counts, "Counts TSV or -");
    rank_cmd->add_option("--records", rank_args.records, "Records file or - (counted on the fly)");
    rank_cmd->add_option("--domains", rank_args.domains, "Domain table")->required();
    rank_cmd->add_option("--out", rank_args.out, "Ranked TSV or -")->capture_default_str();
    rank_cmd->add_option("--threads", rank_args.threads, "Counting threads for --records")->capture_default_str();
    rank_cmd->add_option("--manifest", rank_args.manifest, "Manifest path");
    add_estimator_flags(*rank_cmd, rank_args.est, true);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Recall/precision at ranks, or frozen-parameter recall on a test set");
    eval_cmd->add_option("--ranked", eval_args.ranked, "Ranked TSV or -");
    eval_cmd->add_option("--counts", eval_args.counts, "Counts TSV of the ranked data");
    eval_cmd->add_option("--records", eval_args.records, "Records file of the ranked data");
    eval_cmd->add_option("--domains", eval_args.domains, "Domain table");
    eval_cmd->add_option("--truth", eval_args.truth, "Ground truth TSV");
    eval_cmd->add_option("--params", eval_args.params, "Outcome file written by tune");
    eval_cmd->add_option("--test", eval_args.test, "Dataset directory (records.txt, domains.tsv, truth.tsv)");
    eval_cmd->add_option("--k", eval_args.ks, "Ranks, comma separated")->delimiter(',')->capture_default_str();
    eval_cmd->add_option("--out", eval_args.out, "Output TSV or -")->capture_default_str();
    eval_cmd->add_option("--threads", eval_args.threads, "Counting threads")->capture_default_str();
    eval_cmd->add_option("--manifest", eval_args.manifest, "Manifest path");

    CurveArgs curve_args;
    auto* curve_cmd = app.add_subcommand("curve", "Recall/precision curve as CSV");
    curve_cmd->add_option("--ranked", curve_args.ranked, "Ranked TSV or -")->required();
    curve_cmd->add_option("--counts", curve_args.counts, "Counts TSV of the ranked data");
    curve_cmd->add_option("--records", curve_args.records, "Records file of the ranked data");
    curve_cmd->add_option("--domains", curve_args.domains, "Domain table");
    curve_cmd->add_option("--truth", curve_args.truth, "Ground truth TSV")->required();
    curve_cmd->add_option("--step", curve_args.step, "Rank spacing")->capture_default_str();
    curve_cmd->add_option("--out", curve_args.out, "CSV or -")->capture_default_str();
    curve_cmd->add_option("--threads", curve_args.threads, "Counting threads")->capture_default_str();
    curve_cmd->add_option("--manifest", curve_args.manifest, "Manifest path");

    TuneArgs tune_args;
    auto* tune_cmd = app.add_subcommand("tune", "Pick the parameter maximizing recall at rank k");
    tune_cmd->add_option("--train", tune_args.train, "Dataset directory (records.txt, domains.tsv, truth.tsv)")->required();
    tune_cmd->add_option("--truth", tune_args.truth, "Ground truth TSV (default DIR/truth.tsv)");
    tune_cmd->add_option("--k", tune_args.k, "Rank for recall")->capture_default_str();
    tune_cmd->add_option("--grid", tune_args.grid, "lo:hi:step for lambda and mu")->capture_default_str();
    tune_cmd->add_option("--refine", tune_args.refine, "Refinement spacing (0 disables)")->capture_default_str();
    tune_cmd->add_option("--theta-max", tune_args.theta_max, "Largest theta swept")->capture_default_str();
    tune_cmd->add_option("--out", tune_args.out, "Outcome file or -")->capture_default_str();
    tune_cmd->add_option("--threads", tune_args.threads, "Counting threads")->capture_default_str();
    tune_cmd->add_option("--manifest", tune_args.manifest, "Manifest path");
    add_estimator_flags(*tune_cmd, tune_args.est, false);

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "One-sided paired t-test between two recall columns");
    compare_cmd->add_option("--fixture", compare_args.fixture, "CSV with one row per dataset")->required();
    compare_cmd->add_option("--a", compare_args.a, "Column of the system expected to be better")->capture_default_str();
    compare_cmd->add_option("--b", compare_args.b, "Baseline column")->capture_default_str();
    compare_cmd->add_option("--condition", compare_args.condition, "Column suffix, e.g. top4000 selects proposed_top4000");
    compare_cmd->add_option("--label", compare_args.label, "Dataset label column")->capture_default_str();
    compare_cmd->add_option("--out", compare_args.out, "TSV or -")->capture_default_str();
    compare_cmd->add_option("--manifest", compare_args.manifest, "Manifest path");

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify-optimizer", "Analytic vs projected-gradient solutions on random databases");
    verify_cmd->add_option("--trials", verify_args.trials, "Random databases")->capture_default_str();
    verify_cmd->add_option("--seed", verify_args.seed, "Seed")->capture_default_str();
    verify_cmd->add_option("--max-items", verify_args.max_items, "Items per database, at most")->capture_default_str();
    verify_cmd->add_option("--max-records", verify_args.max_records, "Records per database, at most")->capture_default_str();
    verify_cmd->add_option("--tol", verify_args.tol, "Gradient-norm tolerance of the numeric path")->capture_default_str();
    verify_cmd->add_option("--out", verify_args.out, "Report TSV or -")->capture_default_str();
    verify_cmd->add_option("--manifest", verify_args.manifest, "Manifest path");

    auto report = [&err](const char* kind, const std::string& message) {
        err << "error\t" << kind << '\t' << one_line(message) << '\n';
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        report("usage", e.what());
        return kUsageError;
    }

    const Streams streams{in, out};
    RunManifest manifest;
    try {
        if (synth_cmd->parsed()) {
            manifest.subcommand = "synth";
            run_synth(synth, *synth_cmd, streams, manifest);
        } else if (count_cmd->parsed()) {
            manifest.subcommand = "count";
            run_count(count_args, *count_cmd, streams, manifest);
        } else if (rank_cmd->parsed()) {
            manifest.subcommand = "rank";
            run_rank(rank_args, *rank_cmd, streams, manifest);
        } else if (eval_cmd->parsed()) {
            manifest.subcommand = "eval";
            run_eval(eval_args, *eval_cmd, streams, manifest);
        } else if (curve_cmd->parsed()) {
            manifest.subcommand = "curve";
            run_curve(curve_args, *curve_cmd, streams, manifest);
        } else if (tune_cmd->parsed()) {
            manifest.subcommand = "tune";
            run_tune(tune_args, *tune_cmd, streams, manifest);
        } else if (compare_cmd->parsed()) {
            manifest.subcommand = "compare";
            run_compare(compare_args, *compare_cmd, streams, manifest);
        } else if (verify_cmd->parsed()) {
            manifest.subcommand = "verify-optimizer";
            const int code = run_verify(verify_args, *verify_cmd, streams, manifest);
            if (code != kOk) report("verification", "analytic and numeric solutions disagree beyond tolerance");
            return code;
        }
    } catch (const UsageFailure& e) {
        report("usage", e.what());
        return kUsageError;
    } catch (const FormatError& e) {
        report("format", e.what());
        return kUsageError;
    } catch (const ZeroVariance& e) {
        report("zero-variance", e.what());
        return kRuntimeError;
    } catch (const ConvergenceFailure& e) {
        report("convergence", e.what());
        return kRuntimeError;
    } catch (const UndefinedRatio& e) {
        report("undefined-ratio", e.what());
        return kRuntimeError;
    } catch (const VocabularyMismatch& e) {
        report("vocabulary", e.what());
        return kRuntimeError;
    } catch (const Error& e) {
        report("runtime", e.what());
        return kRuntimeError;
    } catch (const std::exception& e) {
        report("internal", e.what());
        return kRuntimeError;
    }
    return kOk;
}

}  // namespace ratiorules::cli
