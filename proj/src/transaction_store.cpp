#include "ratiorules/transaction_store.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "ratiorules/errors.hpp"
#include "text_util.hpp"

namespace ratiorules {

namespace {

using detail::split_tabs;
using detail::strip_cr;

constexpr std::size_t kStreamChunk = 8192;

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

// Returns the byte offset of the first invalid sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) noexcept {
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            ++i;
            continue;
        }
        std::size_t len;
        char32_t cp;
        if ((b0 & 0xe0) == 0xc0) {
            len = 2;
            cp = b0 & 0x1f;
        } else if ((b0 & 0xf0) == 0xe0) {
            len = 3;
            cp = b0 & 0x0f;
        } else if ((b0 & 0xf8) == 0xf0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            return i;
        }
        if (i + len > n) return i;
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xc0) != 0x80) return i;
            cp = (cp << 6) | (b & 0x3f);
        }
        static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return i;
        i += len;
    }
    return std::string_view::npos;
}

Count parse_count(std::string_view text, std::size_t line_number) {
    if (text.empty() || text.size() > 20) throw FormatError("bad count '" + std::string(text) + "'", line_number);
    Count value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') throw FormatError("bad count '" + std::string(text) + "'", line_number);
        value = value * 10 + static_cast<Count>(c - '0');
    }
    return value;
}

void count_record(const Record& record, Count& n_records, std::vector<Count>& unary,
                  CooccurrenceCounts::PairMap& pairs) {
    ++n_records;
    if (!record.empty() && record.back() >= unary.size()) unary.resize(record.back() + 1, 0);
    for (std::size_t a = 0; a < record.size(); ++a) {
        ++unary[record[a]];
        for (std::size_t b = a + 1; b < record.size(); ++b) ++pairs[PairKey{record[a], record[b]}.packed()];
    }
}

}  // namespace

DomainLabel parse_domain_label(std::string_view text) {
    if (text == "consequent") return DomainLabel::consequent;
    if (text == "antecedent") return DomainLabel::antecedent;
    if (text == "other") return DomainLabel::other;
    throw InvalidArgument("unknown domain label '" + std::string(text) + "'");
}

std::string_view to_string(DomainLabel label) noexcept {
    switch (label) {
        case DomainLabel::consequent: return "consequent";
        case DomainLabel::antecedent: return "antecedent";
        case DomainLabel::other: break;
    }
    return "other";
}

ItemId Vocabulary::intern(std::string_view token) {
    if (auto it = ids_.find(token); it != ids_.end()) return it->second;
    const auto id = static_cast<ItemId>(tokens_.size());
    tokens_.emplace_back(token);
    ids_.emplace(tokens_.back(), id);
    return id;
}

std::optional<ItemId> Vocabulary::find(std::string_view token) const {
    if (auto it = ids_.find(token); it != ids_.end()) return it->second;
    return std::nullopt;
}

std::uint64_t Vocabulary::fingerprint() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ull;
    };
    for (const auto& t : tokens_) {
        for (char c : t) mix(static_cast<unsigned char>(c));
        mix(0);
    }
    return h;
}

DomainTable read_domain_table(std::istream& in) {
    DomainTable table;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto view = strip_cr(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = split_tabs(view);
        if (fields.size() != 2 || fields[0].empty())
            throw FormatError("expected token<TAB>label", line_number);
        DomainLabel label;
        try {
            label = parse_domain_label(fields[1]);
        } catch (const InvalidArgument& e) {
            throw FormatError(e.what(), line_number);
        }
        auto [it, inserted] = table.emplace(std::string(fields[0]), label);
        if (!inserted && it->second != label)
            throw FormatError("conflicting labels for '" + std::string(fields[0]) + "'", line_number);
    }
    return table;
}

void write_domain_table(std::ostream& out, const std::vector<std::pair<std::string, DomainLabel>>& rows) {
    for (const auto& [token, label] : rows) out << token << '\t' << to_string(label) << '\n';
}

void TransactionDatabase::add_record(std::span<const std::string_view> tokens, const DomainTable& domains) {
    Record record;
    record.reserve(tokens.size());
    for (auto token : tokens) {
        const auto before = vocab_.size();
        const auto id = vocab_.intern(token);
        if (vocab_.size() != before) {
            auto it = domains.find(std::string(token));
            domains_.push_back(it == domains.end() ? DomainLabel::other : it->second);
        }
        record.push_back(id);
    }
    std::sort(record.begin(), record.end());
    record.erase(std::unique(record.begin(), record.end()), record.end());
    records_.push_back(std::move(record));
}

TransactionDatabase TransactionDatabase::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > records_.size()) throw InvalidArgument("slice out of range");
    TransactionDatabase out;
    out.vocab_ = vocab_;
    out.domains_ = domains_;
    out.records_.assign(records_.begin() + static_cast<std::ptrdiff_t>(begin),
                        records_.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

void TransactionDatabase::append(const TransactionDatabase& other) {
    if (!(other.vocab_ == vocab_)) throw VocabularyMismatch("append requires a shared vocabulary");
    records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

std::vector<std::string_view> tokenize_line(std::string_view line, std::size_t line_number) {
    if (const auto bad = find_invalid_utf8(line); bad != std::string_view::npos)
        throw FormatError("malformed UTF-8 at byte " + std::to_string(bad), line_number);
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        const auto start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

TransactionDatabase parse_records(std::istream& in, const DomainTable& domains) {
    TransactionDatabase db;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto tokens = tokenize_line(line, line_number);
        db.add_record(tokens, domains);
    }
    return db;
}

std::vector<DomainLabel> resolve_domains(const Vocabulary& vocab, const DomainTable& table) {
    std::vector<DomainLabel> out(vocab.size(), DomainLabel::other);
    for (ItemId id = 0; id < vocab.size(); ++id)
        if (auto it = table.find(vocab.token(id)); it != table.end()) out[id] = it->second;
    return out;
}

CooccurrenceCounts CooccurrenceCounts::empty_for(const Vocabulary& vocab) {
    CooccurrenceCounts c;
    c.unary_.assign(vocab.size(), 0);
    c.fingerprint_ = vocab.fingerprint();
    return c;
}

CooccurrenceCounts CooccurrenceCounts::from_parts(Count n_records, std::vector<Count> unary, PairMap pairs,
                                                  const Vocabulary& vocab) {
    if (unary.size() != vocab.size()) throw VocabularyMismatch("unary counts do not cover the vocabulary");
    for (Count u : unary)
        if (u > n_records) throw InvalidArgument("C(x) exceeds N");
    for (auto it = pairs.begin(); it != pairs.end();) {
        const auto key = PairKey::unpack(it->first);
        if (key.lo >= key.hi || key.hi >= unary.size()) throw InvalidArgument("pair key out of range");
        if (it->second > std::min(unary[key.lo], unary[key.hi])) throw InvalidArgument("C(x,y) exceeds min(C(x),C(y))");
        if (it->second == 0)
            it = pairs.erase(it);
        else
            ++it;
    }
    CooccurrenceCounts c;
    c.n_records_ = n_records;
    c.unary_ = std::move(unary);
    c.pairs_ = std::move(pairs);
    c.fingerprint_ = vocab.fingerprint();
    return c;
}

Count CooccurrenceCounts::pair(ItemId x, ItemId y) const {
    if (x >= unary_.size() || y >= unary_.size()) throw InvalidArgument("item id out of range");
    if (x == y) return unary_[x];
    auto it = pairs_.find(PairKey::of(x, y).packed());
    return it == pairs_.end() ? 0 : it->second;
}

std::vector<std::pair<PairKey, Count>> CooccurrenceCounts::sorted_pairs() const {
    std::vector<std::pair<PairKey, Count>> out;
    out.reserve(pairs_.size());
    for (const auto& [k, v] : pairs_) out.emplace_back(PairKey::unpack(k), v);
    std::sort(out.begin(), out.end());
    return out;
}

void CountAccumulator::add(const Record& record) { count_record(record, n_records_, unary_, pairs_); }

void CountAccumulator::absorb(const CountAccumulator& other) {
    n_records_ += other.n_records_;
    if (other.unary_.size() > unary_.size()) unary_.resize(other.unary_.size(), 0);
    for (std::size_t i = 0; i < other.unary_.size(); ++i) unary_[i] += other.unary_[i];
    for (const auto& [k, v] : other.pairs_) pairs_[k] += v;
}

CooccurrenceCounts CountAccumulator::finish(const Vocabulary& vocab) const {
    if (unary_.size() > vocab.size()) throw VocabularyMismatch("counted ids exceed the vocabulary");
    std::vector<Count> unary = unary_;
    unary.resize(vocab.size(), 0);
    CooccurrenceCounts c;
    c.n_records_ = n_records_;
    c.unary_ = std::move(unary);
    c.pairs_ = pairs_;
    c.fingerprint_ = vocab.fingerprint();
    return c;
}

CooccurrenceCounts count(const TransactionDatabase& db) {
    CountAccumulator acc;
    for (const auto& r : db.records()) acc.add(r);
    return acc.finish(db.vocab());
}

namespace {

CountAccumulator count_partitioned(std::span<const Record> records, unsigned threads) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, records.size()))));
    std::vector<CountAccumulator> parts(threads);
    if (threads == 1) {
        for (const auto& r : records) parts[0].add(r);
        return std::move(parts[0]);
    }
    const std::size_t per = (records.size() + threads - 1) / threads;
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(records.size(), t * per);
            const std::size_t end = std::min(records.size(), begin + per);
            workers.emplace_back([&parts, records, t, begin, end] {
                for (std::size_t i = begin; i < end; ++i) parts[t].add(records[i]);
            });
        }
    }
    for (unsigned t = 1; t < threads; ++t) parts[0].absorb(parts[t]);
    return std::move(parts[0]);
}

}  // namespace

CooccurrenceCounts count_parallel(const TransactionDatabase& db, unsigned threads) {
    return count_partitioned(db.records(), threads).finish(db.vocab());
}

CooccurrenceCounts merge_counts(const CooccurrenceCounts& left, const CooccurrenceCounts& right) {
    if (left.unary_.size() != right.unary_.size() || left.fingerprint_ != right.fingerprint_)
        throw VocabularyMismatch("merge_counts requires counts over the same vocabulary");
    CooccurrenceCounts out = left;
    out.n_records_ += right.n_records_;
    for (std::size_t i = 0; i < right.unary_.size(); ++i) out.unary_[i] += right.unary_[i];
    for (const auto& [k, v] : right.pairs_) out.pairs_[k] += v;
    return out;
}

CountedCorpus count_stream(std::istream& in, const DomainTable& domains, unsigned threads) {
    CountedCorpus corpus;
    CountAccumulator total;
    std::vector<Record> chunk;
    chunk.reserve(kStreamChunk);
    std::string line;
    std::size_t line_number = 0;

    auto flush = [&] {
        total.absorb(count_partitioned(chunk, threads));
        chunk.clear();
    };

    while (std::getline(in, line)) {
        ++line_number;
        Record record;
        for (auto token : tokenize_line(line, line_number)) {
            const auto before = corpus.vocab.size();
            const auto id = corpus.vocab.intern(token);
            if (corpus.vocab.size() != before) {
                auto it = domains.find(std::string(token));
                corpus.domains.push_back(it == domains.end() ? DomainLabel::other : it->second);
            }
            record.push_back(id);
        }
        std::sort(record.begin(), record.end());
        record.erase(std::unique(record.begin(), record.end()), record.end());
        chunk.push_back(std::move(record));
        if (chunk.size() == kStreamChunk) flush();
    }
    if (!chunk.empty()) flush();
    corpus.counts = total.finish(corpus.vocab);
    return corpus;
}

void write_counts(std::ostream& out, const CooccurrenceCounts& counts, const Vocabulary& vocab) {
    if (counts.vocab_size() != vocab.size() || counts.vocab_fingerprint() != vocab.fingerprint())
        throw VocabularyMismatch("counts were not built over this vocabulary");
    out << "#counts\tv1\tN\t" << counts.n_records() << '\n';
    for (ItemId id = 0; id < vocab.size(); ++id)
        out << vocab.token(id) << '\t' << vocab.token(id) << '\t' << counts.unary(id) << '\n';
    for (const auto& [key, c] : counts.sorted_pairs())
        out << vocab.token(key.lo) << '\t' << vocab.token(key.hi) << '\t' << c << '\n';
}

LoadedCounts read_counts(std::istream& in) {
    std::string line;
    std::size_t line_number = 1;
    if (!std::getline(in, line)) throw FormatError("missing counts header", 1);
    const auto header = split_tabs(strip_cr(line));
    if (header.size() != 4 || header[0] != "#counts" || header[2] != "N")
        throw FormatError("bad counts header", 1);
    if (header[1] != "v1") throw FormatError("unsupported counts version '" + std::string(header[1]) + "'", 1);
    const Count n = parse_count(header[3], 1);

    LoadedCounts loaded;
    std::vector<Count> unary;
    CooccurrenceCounts::PairMap pairs;
    bool in_pairs = false;
    while (std::getline(in, line)) {
        ++line_number;
        const auto view = strip_cr(line);
        if (view.empty()) continue;
        const auto f = split_tabs(view);
        if (f.size() != 3 || f[0].empty() || f[1].empty()) throw FormatError("expected x<TAB>y<TAB>count", line_number);
        const Count c = parse_count(f[2], line_number);
        if (f[0] == f[1]) {
            if (in_pairs) throw FormatError("unary line after pair lines", line_number);
            const auto before = loaded.vocab.size();
            loaded.vocab.intern(f[0]);
            if (loaded.vocab.size() == before) throw FormatError("duplicate unary line", line_number);
            unary.push_back(c);
            continue;
        }
        in_pairs = true;
        const auto x = loaded.vocab.find(f[0]);
        const auto y = loaded.vocab.find(f[1]);
        if (!x || !y) throw FormatError("pair references an unknown token", line_number);
        if (!pairs.emplace(PairKey::of(*x, *y).packed(), c).second) throw FormatError("duplicate pair line", line_number);
    }
    try {
        loaded.counts = CooccurrenceCounts::from_parts(n, std::move(unary), std::move(pairs), loaded.vocab);
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what(), 0);
    }
    return loaded;
}

}  // namespace ratiorules
