#include "lmc/structure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

// One word class of the subset construction: a positive-probability label
// word together with the states reachable under it.
struct WordClass {
    std::vector<int> word;        // symbol ids
    std::vector<char> states;     // membership flags, size n
};

std::vector<char> successors(const MarkovChain& chain, const std::vector<char>& from, int symbol) {
    const int n = chain.n();
    std::vector<char> out(n, 0);
    for (int s = 0; s < n; ++s) {
        if (!from[s]) continue;
        for (int t = 0; t < n; ++t)
            if (chain.p(s, t) > 0.0 && chain.label_of(t) == symbol) out[t] = 1;
    }
    return out;
}

// Extension symbols of a class, ascending in declared alphabet order.
std::vector<int> extension_symbols(const MarkovChain& chain, const std::vector<char>& from) {
    std::vector<char> seen(chain.alphabet.size(), 0);
    for (int s = 0; s < chain.n(); ++s) {
        if (!from[s]) continue;
        for (int t = 0; t < chain.n(); ++t)
            if (chain.p(s, t) > 0.0) seen[chain.label_of(t)] = 1;
    }
    std::vector<int> out;
    for (size_t a = 0; a < seen.size(); ++a)
        if (seen[a]) out.push_back(static_cast<int>(a));
    return out;
}

Word ids_to_word(const MarkovChain& chain, const std::vector<int>& ids) {
    Word w;
    w.reserve(ids.size());
    for (int id : ids) w.push_back(chain.alphabet[id]);
    return w;
}

}  // namespace

std::vector<int> word_class_counts(const MarkovChain& chain, int state, int levels, int cap) {
    if (state < 0 || state >= chain.n()) throw DomainError("word_class_counts: unknown state");
    if (cap < 2) throw DomainError("word_class_counts: cap must be at least 2");

    std::vector<int> counts;
    std::vector<WordClass> classes;
    WordClass root;
    root.word = {chain.label_of(state)};
    root.states.assign(chain.n(), 0);
    root.states[state] = 1;
    classes.push_back(std::move(root));
    counts.push_back(1);

    for (int level = 2; level <= levels; ++level) {
        std::vector<WordClass> next;
        bool saturated = false;
        for (const auto& cls : classes) {
            for (int sym : extension_symbols(chain, cls.states)) {
                if (static_cast<int>(next.size()) >= cap) {
                    saturated = true;
                    break;
                }
                WordClass ext;
                ext.word = cls.word;
                ext.word.push_back(sym);
                ext.states = successors(chain, cls.states, sym);
                next.push_back(std::move(ext));
            }
            if (saturated) break;
        }
        classes = std::move(next);
        counts.push_back(static_cast<int>(classes.size()));
    }
    return counts;
}

namespace {

// Walks the single word class from `state` up to n^2 levels.  Returns the
// smallest branching level with two witness words, or nothing when the
// state is n^2-deterministic (hence deterministic).
struct BranchingProbe {
    std::optional<int> threshold;
    std::vector<Word> witnesses;
};

BranchingProbe probe_branching(const MarkovChain& chain, int state) {
    const int n = chain.n();
    const long long nsq = static_cast<long long>(n) * n;

    WordClass current;
    current.word = {chain.label_of(state)};
    current.states.assign(n, 0);
    current.states[state] = 1;

    BranchingProbe probe;
    // level 1 is the single word L(s); walk while the level stays a singleton
    for (long long level = 2; level <= nsq; ++level) {
        auto symbols = extension_symbols(chain, current.states);
        if (symbols.size() >= 2) {
            probe.threshold = static_cast<int>(level);
            for (size_t i = 0; i < 2; ++i) {
                std::vector<int> ids = current.word;
                ids.push_back(symbols[i]);
                probe.witnesses.push_back(ids_to_word(chain, ids));
            }
            return probe;
        }
        current.word.push_back(symbols[0]);
        current.states = successors(chain, current.states, symbols[0]);
    }
    return probe;
}

}  // namespace

StateClassification classify_state(const MarkovChain& chain, int state, int k_max) {
    const int n = chain.n();
    if (state < 0 || state >= n) throw DomainError("classify_state: unknown state");
    const long long nsq = static_cast<long long>(n) * n;
    if (k_max < nsq)
        throw DomainError("classify_state: k_max must be at least n^2 = " + std::to_string(nsq));

    StateClassification result;
    result.state = state;
    auto probe = probe_branching(chain, state);
    if (probe.threshold) {
        result.branching_threshold = probe.threshold;
        result.witness_words = std::move(probe.witnesses);
        return result;
    }
    result.lasso = extract_lasso(chain, state);
    return result;
}

namespace {

// Smallest period whose repetition spells out u.
std::vector<int> primitive_period(const std::vector<int>& u) {
    const size_t m = u.size();
    for (size_t p = 1; p < m; ++p) {
        if (m % p != 0) continue;
        bool ok = true;
        for (size_t i = p; i < m && ok; ++i) ok = u[i] == u[i - p];
        if (ok) return {u.begin(), u.begin() + static_cast<long>(p)};
    }
    return u;
}

}  // namespace

std::pair<Word, Word> extract_lasso(const MarkovChain& chain, int state) {
    const int n = chain.n();
    if (state < 0 || state >= n) throw DomainError("extract_lasso: unknown state");
    if (auto probe = probe_branching(chain, state); probe.threshold)
        throw DomainError("extract_lasso: state '" + chain.states[state] +
                          "' is not deterministic (branching at k=" +
                          std::to_string(*probe.threshold) + ")");

    // follow one run (lowest-index positive successor) to the first repeat
    std::vector<int> seq{state};
    std::vector<int> first_seen(n, -1);
    first_seen[state] = 0;
    int z_len = -1, cycle_start = -1;
    while (true) {
        int cur = seq.back();
        int next = -1;
        for (int t = 0; t < n; ++t)
            if (chain.p(cur, t) > 0.0) {
                next = t;
                break;
            }
        if (first_seen[next] >= 0) {
            z_len = first_seen[next];
            cycle_start = first_seen[next];
            break;
        }
        first_seen[next] = static_cast<int>(seq.size());
        seq.push_back(next);
    }

    std::vector<int> z_ids, u_ids;
    for (int i = 0; i < z_len; ++i) z_ids.push_back(chain.label_of(seq[i]));
    for (size_t i = cycle_start; i < seq.size(); ++i) u_ids.push_back(chain.label_of(seq[i]));

    u_ids = primitive_period(u_ids);
    while (!z_ids.empty() && z_ids.back() == u_ids.back()) {
        z_ids.pop_back();
        std::rotate(u_ids.begin(), u_ids.end() - 1, u_ids.end());
    }

    return {ids_to_word(chain, z_ids), ids_to_word(chain, u_ids)};
}

std::vector<bool> deterministic_state_flags(const MarkovChain& chain) {
    const int n = chain.n();
    std::vector<bool> flags(n);
    for (int s = 0; s < n; ++s) flags[s] = !classify_state(chain, s, n * n).branching_threshold;
    return flags;
}

PathPartitionMass path_partition_mass(const MarkovChain& chain, const Word& w, long long k) {
    if (w.empty()) throw DomainError("path_partition_mass: word must be non-empty");
    if (k < 0) throw DomainError("path_partition_mass: k must be nonnegative");
    std::vector<int> ids;
    ids.reserve(w.size());
    for (const auto& sym : w) {
        int id = chain.symbol_index(sym);
        if (id < 0)
            throw DomainError("path_partition_mass: symbol '" + sym + "' not in chain alphabet");
        ids.push_back(id);
    }

    const int n = chain.n();
    const auto det = deterministic_state_flags(chain);
    const long long latch_limit = std::min<long long>(k, static_cast<long long>(ids.size()));

    // forward mass over (state, hit-a-deterministic-state-yet)
    std::vector<double> branch(n, 0.0), locked(n, 0.0);
    for (int s = 0; s < n; ++s) {
        if (chain.label_of(s) != ids[0]) continue;
        double mass = chain.initial[s];
        if (mass <= 0.0) continue;
        if (1 <= latch_limit && det[s])
            locked[s] = mass;
        else
            branch[s] = mass;
    }
    std::vector<double> nbranch(n), nlocked(n);
    for (size_t i = 1; i < ids.size(); ++i) {
        const long long step = static_cast<long long>(i) + 1;
        std::fill(nbranch.begin(), nbranch.end(), 0.0);
        std::fill(nlocked.begin(), nlocked.end(), 0.0);
        for (int t = 0; t < n; ++t) {
            if (chain.label_of(t) != ids[i]) continue;
            double from_branch = 0.0, from_locked = 0.0;
            for (int s = 0; s < n; ++s) {
                from_branch += branch[s] * chain.p(s, t);
                from_locked += locked[s] * chain.p(s, t);
            }
            if (step <= latch_limit && det[t]) {
                nlocked[t] = from_locked + from_branch;
            } else {
                nbranch[t] = from_branch;
                nlocked[t] = from_locked;
            }
        }
        branch.swap(nbranch);
        locked.swap(nlocked);
    }

    PathPartitionMass out;
    for (int s = 0; s < n; ++s) {
        out.b_mass += branch[s];
        out.d_mass += locked[s];
    }
    return out;
}

namespace {

// Smallest m <= n making the suffix after position k a prefix of u^omega
// for some |u| = m; -1 when none exists.  Shorter valid periods are
// prefixes of longer ones, so the first hit is lexicographically smallest.
template <typename It>
long long find_tail_period(It begin, long long size, long long k, int n) {
    if (k >= size) return 0;  // empty suffix constraint
    const It suffix = begin + static_cast<long>(k);
    const long long slen = size - k;
    for (long long m = 1; m <= std::min<long long>(n, slen); ++m) {
        bool ok = true;
        for (long long i = m; i < slen && ok; ++i) ok = *(suffix + i) == *(suffix + (i - m));
        if (ok) return m;
    }
    return -1;
}

}  // namespace

PeriodicityResult is_ultimately_periodic(const Word& w, long long k, int n) {
    if (w.empty()) throw DomainError("is_ultimately_periodic: word must be non-empty");
    if (n < 1) throw DomainError("is_ultimately_periodic: n must be at least 1");

    PeriodicityResult out;
    long long m = find_tail_period(w.begin(), static_cast<long long>(w.size()), k, n);
    if (m < 0) return out;
    out.periodic = true;
    if (m == 0)
        out.period = {*std::min_element(w.begin(), w.end())};
    else
        out.period.assign(w.begin() + static_cast<long>(k), w.begin() + static_cast<long>(k + m));
    return out;
}

bool has_tail_period(std::span<const std::uint8_t> w, long long k, int n) {
    if (w.empty()) throw DomainError("has_tail_period: word must be non-empty");
    if (n < 1) throw DomainError("has_tail_period: n must be at least 1");
    return find_tail_period(w.begin(), static_cast<long long>(w.size()), k, n) >= 0;
}

namespace {

// Iterative Tarjan over the positive-transition digraph.
std::vector<std::vector<int>> strongly_connected_components(const MarkovChain& chain) {
    const int n = chain.n();
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> components;
    int counter = 0;

    struct Frame {
        int v;
        int next;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<Frame> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            Frame& f = frames.back();
            bool descended = false;
            while (f.next < n) {
                int t = f.next++;
                if (!(chain.p(f.v, t) > 0.0)) continue;
                if (index[t] < 0) {
                    index[t] = low[t] = counter++;
                    stack.push_back(t);
                    on_stack[t] = 1;
                    frames.push_back({t, 0});
                    descended = true;
                    break;
                }
                if (on_stack[t]) low[f.v] = std::min(low[f.v], index[t]);
            }
            if (descended) continue;
            if (low[f.v] == index[f.v]) {
                std::vector<int> comp;
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                    if (w == f.v) break;
                }
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            int v = f.v;
            frames.pop_back();
            if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        }
    }
    return components;
}

}  // namespace

std::vector<BsccInfo> pathological_bsccs(const MarkovChain& chain) {
    const int n = chain.n();
    auto sccs = strongly_connected_components(chain);
    std::vector<int> comp_of(n, -1);
    for (size_t c = 0; c < sccs.size(); ++c)
        for (int s : sccs[c]) comp_of[s] = static_cast<int>(c);

    std::vector<bool> reachable_state(n, false);
    {
        std::vector<int> stack;
        for (int s = 0; s < n; ++s)
            if (chain.initial[s] > 0.0) {
                reachable_state[s] = true;
                stack.push_back(s);
            }
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            for (int t = 0; t < n; ++t)
                if (chain.p(s, t) > 0.0 && !reachable_state[t]) {
                    reachable_state[t] = true;
                    stack.push_back(t);
                }
        }
    }

    const auto det = deterministic_state_flags(chain);
    std::vector<BsccInfo> out;
    for (auto& comp : sccs) {
        bool bottom = true;
        for (int s : comp)
            for (int t = 0; t < n && bottom; ++t)
                if (chain.p(s, t) > 0.0 && comp_of[t] != comp_of[s]) bottom = false;
        if (!bottom) continue;
        BsccInfo info;
        info.states = comp;
        info.pathological = std::all_of(comp.begin(), comp.end(), [&](int s) { return det[s]; });
        info.reachable = std::any_of(comp.begin(), comp.end(),
                                     [&](int s) { return reachable_state[s]; });
        out.push_back(std::move(info));
    }
    return out;
}

bool chain_is_pathological(const MarkovChain& chain) {
    for (const auto& bscc : pathological_bsccs(chain))
        if (bscc.pathological && bscc.reachable) return true;
    return false;
}

}  // namespace lmc
