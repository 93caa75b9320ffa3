#include "lmc/random_chain.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

// random positive integer composition of `total` into `parts` summands
std::vector<int> composition(Xoshiro256ss& rng, int total, int parts) {
    std::vector<int> cuts{0, total};
    for (int i = 1; i < parts; ++i) {
        while (true) {
            int c = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(total) - 1));
            if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) {
                cuts.push_back(c);
                break;
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> out(parts);
    for (int i = 0; i < parts; ++i) out[i] = cuts[i + 1] - cuts[i];
    return out;
}

std::vector<int> random_support(Xoshiro256ss& rng, int n, int max_size) {
    int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_size)));
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(all[i], all[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    all.resize(size);
    return all;
}

}  // namespace

MarkovChain random_chain(Xoshiro256ss& rng, const RandomChainSpec& spec) {
    if (spec.min_states < 1 || spec.max_states < spec.min_states)
        throw DomainError("random_chain: bad state bounds");
    const int n = spec.min_states +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_states - spec.min_states + 1)));
    const int denom = spec.denominator;

    std::vector<std::string> states, labels;
    for (int i = 0; i < n; ++i) states.push_back("q" + std::to_string(i));
    const int alphabet = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_alphabet)));
    for (int i = 0; i < n; ++i) labels.push_back(std::string(1, static_cast<char>('a' + rng.below(alphabet))));

    std::vector<double> transitions(static_cast<size_t>(n) * n, 0.0);
    std::vector<bool> fixed_row(n, false);

    if (rng.uniform01() < spec.det_cycle_prob && n >= 2) {
        // deterministic cycle over a suffix of the states, entered from the rest
        int cycle_len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(n - 1, 3))));
        int start = n - cycle_len;
        for (int i = 0; i < cycle_len; ++i) {
            int from = start + i, to = start + (i + 1) % cycle_len;
            transitions[static_cast<size_t>(from) * n + to] = 1.0;
            fixed_row[from] = true;
        }
    }

    for (int s = 0; s < n; ++s) {
        if (fixed_row[s]) continue;
        auto support = random_support(rng, n, std::min(n, denom));
        auto weights = composition(rng, denom, static_cast<int>(support.size()));
        for (size_t i = 0; i < support.size(); ++i)
            transitions[static_cast<size_t>(s) * n + support[i]] =
                static_cast<double>(weights[i]) / denom;
    }

    auto init_support = random_support(rng, n, std::min(n, denom));
    auto init_weights = composition(rng, denom, static_cast<int>(init_support.size()));
    std::vector<double> initial(n, 0.0);
    for (size_t i = 0; i < init_support.size(); ++i)
        initial[init_support[i]] = static_cast<double>(init_weights[i]) / denom;

    double pmin = 1.0;
    for (double v : transitions)
        if (v > 0.0) pmin = std::min(pmin, v);
    for (double v : initial)
        if (v > 0.0) pmin = std::min(pmin, v);

    return make_chain(std::move(states), std::move(labels), std::move(transitions),
                      std::move(initial), pmin);
}

}  // namespace lmc
