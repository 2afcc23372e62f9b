#pragma once

// Reference implementations used only by tests. Deliberately naive.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ratiorules/transaction_store.hpp"

namespace oracle {

using TokenRecord = std::set<std::string>;
using TokenDb = std::vector<TokenRecord>;

/// Up to `max_items` items named i0.., `max_records` records.
inline TokenDb random_token_db(std::mt19937_64& rng, std::size_t max_items, std::size_t max_records,
                               std::size_t min_records = 1) {
    std::uniform_int_distribution<std::size_t> items(1, max_items);
    std::uniform_int_distribution<std::size_t> recs(min_records, max_records);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t v = items(rng);
    const std::size_t n = recs(rng);
    const double rate = 0.1 + 0.8 * unit(rng);
    TokenDb db(n);
    for (auto& r : db)
        for (std::size_t i = 0; i < v; ++i)
            if (unit(rng) < rate) r.insert("i" + std::to_string(i));
    return db;
}

inline std::string to_text(const TokenDb& db) {
    std::ostringstream out;
    for (const auto& r : db) {
        bool first = true;
        for (const auto& t : r) {
            out << (first ? "" : " ") << t;
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

inline ratiorules::TransactionDatabase to_database(const TokenDb& db, const ratiorules::DomainTable& table = {}) {
    std::istringstream in(to_text(db));
    return ratiorules::parse_records(in, table);
}

/// Nested-loop C(x,y) over ordered token pairs (x == y gives C(x)).
inline std::map<std::pair<std::string, std::string>, std::uint64_t> nested_counts(const TokenDb& db) {
    std::set<std::string> tokens;
    for (const auto& r : db) tokens.insert(r.begin(), r.end());
    std::map<std::pair<std::string, std::string>, std::uint64_t> out;
    for (const auto& x : tokens)
        for (const auto& y : tokens) {
            std::uint64_t c = 0;
            for (const auto& r : db) c += (r.count(x) && r.count(y)) ? 1 : 0;
            out[{x, y}] = c;
        }
    return out;
}

}  // namespace oracle
