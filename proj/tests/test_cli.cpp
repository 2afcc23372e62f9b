#include <doctest.h>

#include <algorithm>
#include <cli.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args, const std::string& stdin_text = "") {
    args.insert(args.begin(), "ratiorules");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::istringstream in(stdin_text);
    std::ostringstream out, err;
    const int code = ratiorules::cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const std::string kSmallSynth =
    "seed = 3\nn_regions = 15\nplaces_min = 4\nplaces_max = 9\nn_records = 1500\n"
    "noise_vocab = 400\nnoise_per_record = 4\nambiguous_rank_floor = 20\n";

std::string data(const std::string& f) { return std::string(RATIORULES_DATA_DIR) + "/" + f; }

}  // namespace

TEST_CASE("rank on the toy database") {
    TempDir dir("ratiorules_cli_toy");
    spit(dir / "toy.txt", "a b\na b\na\nb\n");
    spit(dir / "dom.tsv", "a\tconsequent\nb\tantecedent\n");
    const auto r = run({"rank", "--records", dir / "toy.txt", "--domains", dir / "dom.tsv", "--estimator", "proposed",
                        "--lambda", "1"});
    CHECK(r.code == 0);
    CHECK(r.out == "1\ta\tb\t0.500000\t2\t3\n");
    CHECK(r.err.empty());

    const auto piped = run({"rank", "--records", "-", "--domains", dir / "dom.tsv", "--estimator", "proposed",
                            "--lambda", "1"},
                           "a b\na b\na\nb\n");
    CHECK(piped.out == r.out);
}

TEST_CASE("compare on the TOP-4000 fixture") {
    const auto r = run({"compare", "--fixture", data("table3_top4000.csv")});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    double p = 1.0;
    std::string dof;
    bool saw_t = false;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("p\t", 0) == 0) p = std::stod(line.substr(2));
        if (line.rfind("dof\t", 0) == 0) dof = line.substr(4);
        if (line.rfind("t\t", 0) == 0) saw_t = true;
        if (line.rfind("9", 0) == 0) ++rows;
    }
    CHECK(saw_t);
    CHECK(dof == "12");
    CHECK(p <= 0.0005);
    CHECK(rows == 13);

    const auto wide = run({"compare", "--fixture", data("table3.csv"), "--b", "additive", "--condition", "top12000"});
    REQUIRE(wide.code == 0);
    CHECK(wide.out.find("p\t4.5") != std::string::npos);
}

TEST_CASE("verify-optimizer") {
    const auto r = run({"verify-optimizer", "--trials", "100", "--seed", "7"});
    CHECK(r.code == 0);
    CHECK(r.out.find("status\tpass") != std::string::npos);
}

TEST_CASE("usage and format errors are single lines with exit 2") {
    TempDir dir("ratiorules_cli_err");
    spit(dir / "dom.tsv", "a\tconsequent\n");
    spit(dir / "bad.txt", "ok\n\xff\n");
    const std::vector<std::vector<std::string>> cases{
        {},
        {"frobnicate"},
        {"rank", "--records", dir / "missing.txt", "--domains", dir / "dom.tsv", "--estimator", "mle"},
        {"rank", "--records", dir / "bad.txt", "--domains", dir / "dom.tsv", "--estimator", "mle"},
        {"rank", "--records", dir / "bad.txt", "--domains", dir / "dom.tsv", "--estimator", "svm"},
        {"rank", "--records", dir / "bad.txt", "--domains", dir / "dom.tsv", "--estimator", "proposed"},
        {"rank", "--records", dir / "bad.txt", "--domains", dir / "dom.tsv", "--estimator", "proposed", "--lambda", "-1"},
        {"count", "--bogus"},
        {"tune", "--train", dir.path.string(), "--estimator", "mle"},
        {"compare", "--fixture", dir / "dom.tsv"},
    };
    for (const auto& args : cases) {
        const auto r = run(args);
        CAPTURE(r.err);
        CHECK(r.code == 2);
        CHECK(r.err.rfind("error\t", 0) == 0);
        CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    }
    CHECK(run({"rank", "--records", dir / "bad.txt", "--domains", dir / "dom.tsv", "--estimator", "mle"}).err.rfind(
              "error\tformat\tline 2", 0) == 0);
}

TEST_CASE("runtime errors exit 1") {
    spit(fs::temp_directory_path() / "ratiorules_flat.csv", "period,a,b\nx,0.5,0.4\ny,0.6,0.5\n");
    const auto r = run({"compare", "--fixture", (fs::temp_directory_path() / "ratiorules_flat.csv").string(), "--a", "a", "--b", "b"});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error\tzero-variance\t", 0) == 0);
    fs::remove(fs::temp_directory_path() / "ratiorules_flat.csv");
}

TEST_CASE("help documents the formats") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("File formats") != std::string::npos);
    CHECK(r.out.find("verify-optimizer") != std::string::npos);
}

TEST_CASE("piped stages equal staged files") {
    TempDir dir("ratiorules_cli_pipe");
    spit(dir / "cfg.toml", kSmallSynth);
    REQUIRE(run({"synth", "--config", dir / "cfg.toml", "--out", dir / "corpus"}).code == 0);
    const auto records = dir / "corpus/records.txt";
    const auto domains = dir / "corpus/domains.tsv";
    const auto truth = dir / "corpus/truth.tsv";
    CHECK(fs::exists(dir / "corpus/manifest.json"));

    REQUIRE(run({"count", "--records", records, "--domains", domains, "--out", dir / "counts.tsv"}).code == 0);
    REQUIRE(run({"rank", "--counts", dir / "counts.tsv", "--domains", domains, "--estimator", "proposed", "--lambda",
                 "2.5", "--out", dir / "ranked.tsv"})
                .code == 0);
    const auto staged = run({"eval", "--ranked", dir / "ranked.tsv", "--counts", dir / "counts.tsv", "--truth", truth,
                             "--k", "50,200,1000"});
    REQUIRE(staged.code == 0);

    const auto counted = run({"count", "--domains", domains}, slurp(records));
    CHECK(counted.out == slurp(dir / "counts.tsv"));
    const auto ranked = run({"rank", "--counts", "-", "--domains", domains, "--estimator", "proposed", "--lambda", "2.5"},
                            counted.out);
    CHECK(ranked.out == slurp(dir / "ranked.tsv"));
    const auto piped = run({"eval", "--ranked", "-", "--records", records, "--domains", domains, "--truth", truth, "--k",
                            "50,200,1000"},
                           ranked.out);
    CHECK(piped.code == 0);
    CHECK(piped.out == staged.out);
    CHECK(staged.out.rfind("k\trecall\tprecision\n50\t", 0) == 0);

    const auto direct = run({"rank", "--records", records, "--domains", domains, "--estimator", "proposed", "--lambda",
                             "2.5", "--threads", "3"});
    CHECK(direct.out == ranked.out);
}

TEST_CASE("identical manifests give byte-identical outputs") {
    TempDir dir("ratiorules_cli_det");
    spit(dir / "cfg.toml", kSmallSynth);
    for (const char* run_name : {"r1", "r2"}) {
        const std::string base = dir / run_name;
        REQUIRE(run({"synth", "--config", dir / "cfg.toml", "--out", base + "/corpus", "--threads", "3"}).code == 0);
        REQUIRE(run({"count", "--records", base + "/corpus/records.txt", "--threads", "4", "--out", base + "/counts.tsv"})
                    .code == 0);
        REQUIRE(run({"rank", "--counts", base + "/counts.tsv", "--domains", base + "/corpus/domains.tsv", "--estimator",
                     "apriori", "--theta", "1", "--out", base + "/ranked.tsv"})
                    .code == 0);
        REQUIRE(run({"curve", "--ranked", base + "/ranked.tsv", "--counts", base + "/counts.tsv", "--truth",
                     base + "/corpus/truth.tsv", "--step", "25", "--out", base + "/curve.csv"})
                    .code == 0);
    }
    for (const char* f : {"corpus/records.txt", "counts.tsv", "ranked.tsv", "curve.csv"})
        CHECK(slurp(dir.path / "r1" / f) == slurp(dir.path / "r2" / f));
    CHECK(slurp(dir.path / "r1/curve.csv").rfind("rank,recall,precision\n25,", 0) == 0);

    const auto m = nlohmann::json::parse(slurp(dir.path / "r1/ranked.tsv.manifest.json"));
    CHECK(m["subcommand"] == "rank");
    CHECK(m["estimator"] == "apriori theta=1");
    CHECK(m["flags"]["--theta"] == "1");
    CHECK(m["inputs"].size() == 2);
    CHECK_FALSE(m["flags"].contains("-h,--help"));
    const auto sm = nlohmann::json::parse(slurp(dir.path / "r1/corpus/manifest.json"));
    CHECK(sm["seed"] == 3);
}

TEST_CASE("tune then evaluate with frozen parameters") {
    TempDir dir("ratiorules_cli_tune");
    spit(dir / "cfg.toml", kSmallSynth);
    REQUIRE(run({"synth", "--config", dir / "cfg.toml", "--out", dir / "train", "--seed", "10"}).code == 0);
    REQUIRE(run({"synth", "--config", dir / "cfg.toml", "--out", dir / "test", "--seed", "11"}).code == 0);
    const auto t = run({"tune", "--estimator", "proposed", "--train", dir / "train", "--k", "200", "--grid", "0:5:0.5",
                        "--refine", "0.1", "--out", dir / "params.txt"});
    REQUIRE(t.code == 0);
    const auto params = slurp(dir / "params.txt");
    CHECK(params.rfind("family=proposed\nparameter=", 0) == 0);
    const auto e = run({"eval", "--params", dir / "params.txt", "--test", dir / "test", "--k", "100,200"});
    REQUIRE(e.code == 0);
    CHECK(e.out.rfind("k\trecall\n100\t", 0) == 0);

    const auto theta = run({"tune", "--estimator", "apriori", "--train", dir / "train", "--k", "200", "--theta-max", "5"});
    REQUIRE(theta.code == 0);
    CHECK(theta.out.find("evaluations=6\n") != std::string::npos);
}
