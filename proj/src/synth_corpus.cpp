#include "ratiorules/synth_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "ratiorules/counter_rng.hpp"
#include "ratiorules/errors.hpp"
#include "text_util.hpp"

namespace ratiorules {

namespace {

// Stream 0 is the layout; record i uses stream i + 1.
constexpr std::uint64_t kLayoutStream = 0;

std::vector<double> zipf_cdf(std::size_t n, double exponent) {
    std::vector<double> cdf(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        total += std::pow(static_cast<double>(r + 1), -exponent);
        cdf[r] = total;
    }
    for (auto& c : cdf) c /= total;
    if (!cdf.empty()) cdf.back() = 1.0;
    return cdf;
}

std::size_t sample_cdf(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void validate(const SynthConfig& cfg) {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(name) + " must be in [0, 1]");
    };
    prob(cfg.p_region_mention, "p_region_mention");
    prob(cfg.p_place_mention, "p_place_mention");
    prob(cfg.ambiguity_rate, "ambiguity_rate");
    prob(cfg.p_second_region, "p_second_region");
    if (!(cfg.region_zipf >= 0.0) || !(cfg.noise_zipf >= 0.0) || !(cfg.place_zipf >= 0.0)) throw InvalidArgument("zipf exponents must be >= 0");
    if (cfg.places_min > cfg.places_max) throw InvalidArgument("places_min exceeds places_max");
    if (cfg.n_regions == 0 && (cfg.p_region_mention > 0.0 || cfg.p_place_mention > 0.0))
        throw InvalidArgument("0 regions with nonzero mention probabilities");
    if (cfg.noise_per_record > 0 && cfg.noise_vocab == 0) throw InvalidArgument("noise tokens requested with empty noise vocabulary");
}

SynthConfig read_synth_config(std::istream& in) {
    SynthConfig cfg;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw FormatError("expected key = value", line_number);
        const std::string key = trim(std::string_view(text).substr(0, eq));
        std::string value = trim(std::string_view(text).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        try {
            std::size_t used = 0;
            auto as_size = [&] {
                if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
                const auto v = std::stoull(value, &used);
                if (used != value.size()) throw std::invalid_argument("trailing");
                return static_cast<std::size_t>(v);
            };
            auto as_real = [&] {
                const double v = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument("trailing");
                return v;
            };
            if (key == "seed") cfg.seed = as_size();
            else if (key == "n_regions") cfg.n_regions = as_size();
            else if (key == "places_min") cfg.places_min = as_size();
            else if (key == "places_max") cfg.places_max = as_size();
            else if (key == "n_records") cfg.n_records = as_size();
            else if (key == "p_region_mention") cfg.p_region_mention = as_real();
            else if (key == "p_place_mention") cfg.p_place_mention = as_real();
            else if (key == "place_zipf") cfg.place_zipf = as_real();
            else if (key == "p_second_region") cfg.p_second_region = as_real();
            else if (key == "region_zipf") cfg.region_zipf = as_real();
            else if (key == "noise_vocab") cfg.noise_vocab = as_size();
            else if (key == "noise_zipf") cfg.noise_zipf = as_real();
            else if (key == "noise_per_record") cfg.noise_per_record = as_size();
            else if (key == "ambiguity_rate") cfg.ambiguity_rate = as_real();
            else if (key == "ambiguous_rank_floor") cfg.ambiguous_rank_floor = as_size();
            else throw FormatError("unknown key '" + key + "'", line_number);
        } catch (const std::logic_error&) {
            throw FormatError("bad value for '" + key + "'", line_number);
        }
    }
    validate(cfg);
    return cfg;
}

void write_synth_config(std::ostream& out, const SynthConfig& cfg) {
    using detail::shortest;
    out << "seed = " << cfg.seed << '\n'
        << "n_regions = " << cfg.n_regions << '\n'
        << "places_min = " << cfg.places_min << '\n'
        << "places_max = " << cfg.places_max << '\n'
        << "n_records = " << cfg.n_records << '\n'
        << "p_region_mention = " << shortest(cfg.p_region_mention) << '\n'
        << "p_place_mention = " << shortest(cfg.p_place_mention) << '\n'
        << "place_zipf = " << shortest(cfg.place_zipf) << '\n'
        << "region_zipf = " << shortest(cfg.region_zipf) << '\n'
        << "p_second_region = " << shortest(cfg.p_second_region) << '\n'
        << "noise_vocab = " << cfg.noise_vocab << '\n'
        << "noise_zipf = " << shortest(cfg.noise_zipf) << '\n'
        << "noise_per_record = " << cfg.noise_per_record << '\n'
        << "ambiguity_rate = " << shortest(cfg.ambiguity_rate) << '\n'
        << "ambiguous_rank_floor = " << cfg.ambiguous_rank_floor << '\n';
}

SynthLayout make_layout(const SynthConfig& cfg) {
    validate(cfg);
    CounterRng rng(cfg.seed, kLayoutStream);
    SynthLayout layout;
    layout.regions.reserve(cfg.n_regions);
    layout.places.resize(cfg.n_regions);
    std::vector<std::pair<std::size_t, std::size_t>> flat;  // (region, local index)
    for (std::size_t r = 0; r < cfg.n_regions; ++r) {
        layout.regions.push_back("R" + std::to_string(r));
        const std::size_t n = cfg.places_min + rng.below(cfg.places_max - cfg.places_min + 1);
        for (std::size_t k = 0; k < n; ++k) {
            layout.places[r].push_back("P" + std::to_string(r) + "_" + std::to_string(k));
            flat.emplace_back(r, k);
        }
    }

    layout.noise_tokens.reserve(cfg.noise_vocab);
    for (std::size_t z = 0; z < cfg.noise_vocab; ++z) layout.noise_tokens.push_back("n" + std::to_string(z));
    layout.noise_owner.assign(cfg.noise_vocab, SynthLayout::kNoOwner);

    const auto n_ambiguous = static_cast<std::size_t>(std::llround(cfg.ambiguity_rate * static_cast<double>(flat.size())));
    const std::size_t floor = std::min(cfg.ambiguous_rank_floor, cfg.noise_vocab);
    // At least one plain noise token must remain so that redraws terminate.
    if (n_ambiguous > cfg.noise_vocab - floor || (n_ambiguous > 0 && n_ambiguous >= cfg.noise_vocab))
        throw InvalidArgument("noise_vocab too small for the ambiguous places");
    // Partial Fisher-Yates over places, then over noise ranks.
    std::vector<std::size_t> place_order(flat.size());
    std::iota(place_order.begin(), place_order.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_ambiguous; ++i)
        std::swap(place_order[i], place_order[i + rng.below(place_order.size() - i)]);
    std::vector<std::size_t> rank_order(cfg.noise_vocab - floor);
    std::iota(rank_order.begin(), rank_order.end(), floor);
    for (std::size_t i = 0; i < n_ambiguous; ++i) {
        std::swap(rank_order[i], rank_order[i + rng.below(rank_order.size() - i)]);
        const auto [r, k] = flat[place_order[i]];
        layout.noise_tokens[rank_order[i]] = layout.places[r][k];
        layout.noise_owner[rank_order[i]] = r;
        layout.ambiguous_places.push_back(place_order[i]);
    }
    std::sort(layout.ambiguous_places.begin(), layout.ambiguous_places.end());

    layout.place_probability.resize(cfg.places_max);
    for (std::size_t k = 0; k < cfg.places_max; ++k)
        layout.place_probability[k] = cfg.p_place_mention * std::pow(static_cast<double>(k + 1), -cfg.place_zipf);
    layout.region_cdf = zipf_cdf(cfg.n_regions, cfg.region_zipf);
    layout.noise_cdf = zipf_cdf(cfg.noise_vocab, cfg.noise_zipf);
    return layout;
}

std::string generate_record(const SynthConfig& cfg, const SynthLayout& layout, std::size_t index) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(index) + 1);
    std::string line;
    auto emit = [&line](const std::string& token) {
        if (!line.empty()) line.push_back(' ');
        line += token;
    };
    auto cover = [&](std::size_t region) {
        if (rng.uniform() < cfg.p_region_mention) emit(layout.regions[region]);
        const auto& places = layout.places[region];
        for (std::size_t k = 0; k < places.size(); ++k)
            if (rng.uniform() < layout.place_probability[k]) emit(places[k]);
    };
    std::size_t covered[2] = {SynthLayout::kNoOwner, SynthLayout::kNoOwner};
    if (cfg.n_regions > 0) {
        const std::size_t region = sample_cdf(layout.region_cdf, rng.uniform());
        cover(region);
        covered[0] = region;
        if (cfg.n_regions > 1 && rng.uniform() < cfg.p_second_region) {
            // Redraw until distinct; the first draw is `region` again only with its own mass.
            std::size_t second = region;
            while (second == region) second = sample_cdf(layout.region_cdf, rng.uniform());
            cover(second);
            covered[1] = second;
        }
    }
    for (std::size_t i = 0; i < cfg.noise_per_record; ++i) {
        std::size_t z = sample_cdf(layout.noise_cdf, rng.uniform());
        while (layout.noise_owner[z] != SynthLayout::kNoOwner &&
               (layout.noise_owner[z] == covered[0] || layout.noise_owner[z] == covered[1]))
            z = sample_cdf(layout.noise_cdf, rng.uniform());
        emit(layout.noise_tokens[z]);
    }
    return line;
}

namespace {

SynthCorpus assemble(const SynthConfig& cfg, const SynthLayout& layout, std::vector<std::string> lines) {
    SynthCorpus corpus;
    corpus.lines = std::move(lines);
    std::vector<std::pair<std::string, std::string>> truth;
    for (std::size_t r = 0; r < cfg.n_regions; ++r) {
        corpus.domain_rows.emplace_back(layout.regions[r], DomainLabel::antecedent);
        for (const auto& place : layout.places[r]) {
            corpus.domain_rows.emplace_back(place, DomainLabel::consequent);
            truth.emplace_back(place, layout.regions[r]);
        }
    }
    for (std::size_t z = 0; z < layout.noise_tokens.size(); ++z)
        if (layout.noise_tokens[z] == "n" + std::to_string(z)) corpus.domain_rows.emplace_back(layout.noise_tokens[z], DomainLabel::other);
    corpus.truth = GroundTruth(std::move(truth));
    return corpus;
}

}  // namespace

SynthCorpus generate(const SynthConfig& cfg) {
    const auto layout = make_layout(cfg);
    std::vector<std::string> lines;
    lines.reserve(cfg.n_records);
    for (std::size_t i = 0; i < cfg.n_records; ++i) lines.push_back(generate_record(cfg, layout, i));
    return assemble(cfg, layout, std::move(lines));
}

SynthCorpus generate_parallel(const SynthConfig& cfg, unsigned threads) {
    const auto layout = make_layout(cfg);
    std::vector<std::string> lines(cfg.n_records);
    threads = std::max(1u, threads);
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t)
            workers.emplace_back([&, t] {
                for (std::size_t i = t; i < cfg.n_records; i += threads) lines[i] = generate_record(cfg, layout, i);
            });
    }
    return assemble(cfg, layout, std::move(lines));
}

DomainTable SynthCorpus::domain_table() const {
    DomainTable table;
    for (const auto& [token, label] : domain_rows) table.emplace(token, label);
    return table;
}

TransactionDatabase SynthCorpus::to_database() const {
    const auto table = domain_table();
    TransactionDatabase db;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto tokens = tokenize_line(lines[i], i + 1);
        db.add_record(tokens, table);
    }
    return db;
}

void write_corpus(const std::string& dir, const SynthCorpus& corpus) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto open = [](const fs::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw Error("cannot write " + p.string());
        return out;
    };
    {
        auto out = open(fs::path(dir) / "records.txt");
        for (const auto& l : corpus.lines) out << l << '\n';
    }
    {
        auto out = open(fs::path(dir) / "domains.tsv");
        write_domain_table(out, corpus.domain_rows);
    }
    {
        auto out = open(fs::path(dir) / "truth.tsv");
        write_ground_truth(out, corpus.truth);
    }
}

}  // namespace ratiorules
