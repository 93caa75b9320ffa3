#pragma once

// Test-only oracles, kept independent of the library's computation paths:
// word probabilities by explicit path enumeration, distances by exhaustive
// word enumeration without pruning.

#include <cmath>
#include <string>
#include <vector>

#include "lmc/chain.hpp"

namespace testsupport {

// Sum over all state paths labelled by w of mu(s1) * prod P(s_i, s_{i+1}).
inline double brute_word_probability(const lmc::MarkovChain& chain, const lmc::Word& w) {
    const int n = chain.n();
    std::vector<int> ids;
    for (const auto& sym : w) ids.push_back(chain.symbol_index(sym));

    double total = 0.0;
    std::vector<int> path(w.size(), 0);
    while (true) {
        double p = 0.0;
        bool ok = true;
        for (size_t i = 0; i < path.size() && ok; ++i)
            ok = ids[i] >= 0 && chain.label_of(path[i]) == ids[i];
        if (ok) {
            p = chain.initial[path[0]];
            for (size_t i = 0; i + 1 < path.size() && p > 0.0; ++i)
                p *= chain.p(path[i], path[i + 1]);
            total += p;
        }
        int pos = static_cast<int>(path.size()) - 1;
        while (pos >= 0 && ++path[static_cast<size_t>(pos)] == n)
            path[static_cast<size_t>(pos--)] = 0;
        if (pos < 0) break;
    }
    return total;
}

// Exhaustive max_{w in Sigma^k} |P1(w) - P2(w)| over the union alphabet,
// no pruning, path-enumeration probabilities.
inline double brute_fixed_k_distance(const lmc::MarkovChain& c1, const lmc::MarkovChain& c2,
                                     int k) {
    auto symbols = lmc::union_alphabet(c1, c2);
    const int s = static_cast<int>(symbols.size());
    std::vector<int> ids(static_cast<size_t>(k), 0);
    double best = 0.0;
    while (true) {
        lmc::Word w;
        for (int id : ids) w.push_back(symbols[static_cast<size_t>(id)]);
        auto prob = [&](const lmc::MarkovChain& c) {
            for (const auto& sym : w)
                if (c.symbol_index(sym) < 0) return 0.0;
            return brute_word_probability(c, w);
        };
        best = std::max(best, std::fabs(prob(c1) - prob(c2)));
        int pos = k - 1;
        while (pos >= 0 && ++ids[static_cast<size_t>(pos)] == s) ids[static_cast<size_t>(pos--)] = 0;
        if (pos < 0) break;
    }
    return best;
}

// All words of length k over the chain's alphabet.
inline std::vector<lmc::Word> all_words(const lmc::MarkovChain& chain, int k) {
    std::vector<lmc::Word> out;
    const int s = static_cast<int>(chain.alphabet.size());
    std::vector<int> ids(static_cast<size_t>(k), 0);
    while (true) {
        lmc::Word w;
        for (int id : ids) w.push_back(chain.alphabet[static_cast<size_t>(id)]);
        out.push_back(std::move(w));
        int pos = k - 1;
        while (pos >= 0 && ++ids[static_cast<size_t>(pos)] == s) ids[static_cast<size_t>(pos--)] = 0;
        if (pos < 0) break;
    }
    return out;
}

inline lmc::Word word_of(const std::string& letters) {
    lmc::Word w;
    for (char c : letters) w.emplace_back(1, c);
    return w;
}

}  // namespace testsupport
