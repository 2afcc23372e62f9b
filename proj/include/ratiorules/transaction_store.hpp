#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ratiorules {

/// Dense index into a Vocabulary, assigned in first-seen order.
using ItemId = std::uint32_t;
using Count = std::uint64_t;

enum class DomainLabel : std::uint8_t { other, consequent, antecedent };

DomainLabel parse_domain_label(std::string_view text);
std::string_view to_string(DomainLabel label) noexcept;

/// Bijection between item tokens and ItemIds.
class Vocabulary {
public:
    ItemId intern(std::string_view token);
    std::optional<ItemId> find(std::string_view token) const;
    const std::string& token(ItemId id) const { return tokens_.at(id); }
    std::size_t size() const noexcept { return tokens_.size(); }

    /// FNV-1a over the tokens in id order; equal fingerprints mean the
    /// same id assignment.
    std::uint64_t fingerprint() const noexcept;

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, ItemId, Hash, std::equal_to<>> ids_;
};

/// token -> label. Tokens not present are `other`.
using DomainTable = std::unordered_map<std::string, DomainLabel>;

/// Reads `token<TAB>label` lines. Blank lines and lines starting with '#'
/// are skipped.
DomainTable read_domain_table(std::istream& in);
void write_domain_table(std::ostream& out, const std::vector<std::pair<std::string, DomainLabel>>& rows);

/// Item ids of one record, sorted ascending and unique.
using Record = std::vector<ItemId>;

class TransactionDatabase {
public:
    TransactionDatabase() = default;

    /// Adds one record given as raw tokens. Duplicates collapse.
    void add_record(std::span<const std::string_view> tokens, const DomainTable& domains);

    const std::vector<Record>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const Vocabulary& vocab() const noexcept { return vocab_; }
    DomainLabel domain(ItemId id) const { return domains_.at(id); }
    const std::vector<DomainLabel>& domains() const noexcept { return domains_; }

    /// Records [begin, end) over the same vocabulary and labels.
    TransactionDatabase slice(std::size_t begin, std::size_t end) const;

    /// Appends the records of `other`, which must share this vocabulary.
    void append(const TransactionDatabase& other);

private:
    std::vector<Record> records_;
    Vocabulary vocab_;
    std::vector<DomainLabel> domains_;
};

/// One record per line, whitespace-separated tokens, UTF-8. Empty lines are
/// kept as empty records. Throws FormatError on malformed UTF-8.
TransactionDatabase parse_records(std::istream& in, const DomainTable& domains);

/// Splits a line on ASCII whitespace after validating it as UTF-8.
std::vector<std::string_view> tokenize_line(std::string_view line, std::size_t line_number);

/// Unordered item pair with lo <= hi.
struct PairKey {
    ItemId lo;
    ItemId hi;

    static PairKey of(ItemId a, ItemId b) noexcept { return a <= b ? PairKey{a, b} : PairKey{b, a}; }
    std::uint64_t packed() const noexcept { return (std::uint64_t{lo} << 32) | hi; }
    static PairKey unpack(std::uint64_t v) noexcept {
        return {static_cast<ItemId>(v >> 32), static_cast<ItemId>(v & 0xffffffffu)};
    }
    auto operator<=>(const PairKey&) const = default;
};

/// N, C(w) and sparse C(wi,wj) for lo < hi. C(x,x) is C(x). Immutable once
/// built; safe to share across threads.
class CooccurrenceCounts {
public:
    using PairMap = std::unordered_map<std::uint64_t, Count>;

    CooccurrenceCounts() = default;

    /// Zero counts over `vocab`; the identity for merge_counts.
    static CooccurrenceCounts empty_for(const Vocabulary& vocab);

    /// Assembles counts from raw parts, checking C(x,y) <= min(C(x),C(y)) <= N.
    static CooccurrenceCounts from_parts(Count n_records, std::vector<Count> unary, PairMap pairs,
                                         const Vocabulary& vocab);

    Count n_records() const noexcept { return n_records_; }
    Count unary(ItemId x) const { return unary_.at(x); }
    Count pair(ItemId x, ItemId y) const;
    std::size_t vocab_size() const noexcept { return unary_.size(); }
    std::uint64_t vocab_fingerprint() const noexcept { return fingerprint_; }
    const PairMap& pairs() const noexcept { return pairs_; }
    std::size_t pair_count() const noexcept { return pairs_.size(); }

    /// Stored pairs (lo < hi) sorted by key.
    std::vector<std::pair<PairKey, Count>> sorted_pairs() const;

    bool operator==(const CooccurrenceCounts& other) const = default;

private:
    friend class CountAccumulator;
    friend CooccurrenceCounts merge_counts(const CooccurrenceCounts&, const CooccurrenceCounts&);

    Count n_records_ = 0;
    std::vector<Count> unary_;
    PairMap pairs_;
    std::uint64_t fingerprint_ = Vocabulary{}.fingerprint();
};

/// Incremental counter over records whose ids may exceed the final
/// vocabulary size seen so far.
class CountAccumulator {
public:
    void add(const Record& record);
    void absorb(const CountAccumulator& other);
    /// Binds the accumulated counts to `vocab`. Every counted id must be < vocab.size().
    CooccurrenceCounts finish(const Vocabulary& vocab) const;

private:
    Count n_records_ = 0;
    std::vector<Count> unary_;
    CooccurrenceCounts::PairMap pairs_;
};

CooccurrenceCounts count(const TransactionDatabase& db);

/// Counts records split into `threads` contiguous partitions merged in order.
CooccurrenceCounts count_parallel(const TransactionDatabase& db, unsigned threads);

/// Fieldwise sum. Throws VocabularyMismatch unless both share a vocabulary.
CooccurrenceCounts merge_counts(const CooccurrenceCounts& left, const CooccurrenceCounts& right);

/// Vocabulary, labels and counts produced by a streaming pass.
struct CountedCorpus {
    Vocabulary vocab;
    std::vector<DomainLabel> domains;
    CooccurrenceCounts counts;
};

/// Counts a records stream without retaining records. Lines are
/// tokenized in order; each chunk is counted on `threads` workers.
CountedCorpus count_stream(std::istream& in, const DomainTable& domains, unsigned threads = 1);

/// Labels for every vocabulary item under `table`.
std::vector<DomainLabel> resolve_domains(const Vocabulary& vocab, const DomainTable& table);

/// TSV dump. First line `#counts<TAB>v1<TAB>N<TAB><n>`, then one
/// `x<TAB>x<TAB>C(x)` line per vocabulary item in id order, then
/// `x<TAB>y<TAB>C(x,y)` for stored pairs sorted by id.
void write_counts(std::ostream& out, const CooccurrenceCounts& counts, const Vocabulary& vocab);

struct LoadedCounts {
    Vocabulary vocab;
    CooccurrenceCounts counts;
};
LoadedCounts read_counts(std::istream& in);

}  // namespace ratiorules
