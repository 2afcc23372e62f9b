#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ratiorules/evaluation.hpp"
#include "ratiorules/transaction_store.hpp"

namespace ratiorules {

/// Regions (antecedents) each own a set of places (consequents). A record
/// is about one region, and with probability p_second_region also about a
/// second one; for each region it covers it mentions the region token and
/// each of the region's places independently. Zipf-distributed noise tokens
/// follow. A
/// fraction of places share their label with a noise token and so also
/// turn up in unrelated records.
struct SynthConfig {
    std::uint64_t seed = 1;
    std::size_t n_regions = 150;
    std::size_t places_min = 10;
    std::size_t places_max = 40;
    std::size_t n_records = 20000;
    double p_region_mention = 0.5;
    double p_place_mention = 0.05;  // mention probability of a region's first place
    double place_zipf = 0.7;        // place k of a region is mentioned w.p. p_place_mention (k+1)^-place_zipf
    double region_zipf = 1.3;  // 0 gives uniform region choice
    double p_second_region = 0.3;
    std::size_t noise_vocab = 5000;
    double noise_zipf = 1.1;
    std::size_t noise_per_record = 8;
    double ambiguity_rate = 0.2;
    std::size_t ambiguous_rank_floor = 100;  // ambiguous places shadow noise ranks >= this
};

/// Throws InvalidArgument on out-of-range or degenerate settings.
void validate(const SynthConfig& cfg);

/// Flat `key = value` text; '#' starts a comment. Unknown keys are errors.
SynthConfig read_synth_config(std::istream& in);
void write_synth_config(std::ostream& out, const SynthConfig& cfg);

/// Fixed structure drawn once per config: places per region, ambiguous
/// places and the noise rank each one shadows. An ambiguous place drawn as
/// noise is redrawn when the record already covers its region.
struct SynthLayout {
    static constexpr std::size_t kNoOwner = static_cast<std::size_t>(-1);

    std::vector<std::vector<std::string>> places;  // per region
    std::vector<std::string> regions;
    std::vector<std::string> noise_tokens;  // by noise rank; ambiguous ranks hold the place token
    std::vector<std::size_t> noise_owner;   // region of the shadowed place, or kNoOwner
    std::vector<std::size_t> ambiguous_places;  // flat place indices, sorted
    std::vector<double> place_probability;  // by index within a region
    std::vector<double> region_cdf;
    std::vector<double> noise_cdf;
};

SynthLayout make_layout(const SynthConfig& cfg);

/// Tokens of record `index`, space-separated. Pure in (cfg, index).
std::string generate_record(const SynthConfig& cfg, const SynthLayout& layout, std::size_t index);

struct SynthCorpus {
    std::vector<std::string> lines;
    GroundTruth truth;
    std::vector<std::pair<std::string, DomainLabel>> domain_rows;

    DomainTable domain_table() const;
    TransactionDatabase to_database() const;
};

SynthCorpus generate(const SynthConfig& cfg);
/// Same output as generate(), records produced on `threads` workers.
SynthCorpus generate_parallel(const SynthConfig& cfg, unsigned threads);

/// Writes records.txt, domains.tsv and truth.tsv into `dir`.
void write_corpus(const std::string& dir, const SynthCorpus& corpus);

}  // namespace ratiorules
