#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lmc/chain.hpp"

namespace lmc {

// Branching/determinism classification of a single state.  A state is
// k-deterministic when one length-k word from it has probability 1, and
// k-branching otherwise; n^2-deterministic states are deterministic
// outright, which keeps the breadth-first test finite.
struct StateClassification {
    int state = -1;
    // smallest k with the state k-branching; empty means deterministic
    std::optional<int> branching_threshold;
    std::vector<Word> witness_words;               // two words at the threshold
    std::optional<std::pair<Word, Word>> lasso;    // (z, u) for deterministic states
};

StateClassification classify_state(const MarkovChain& chain, int state, int k_max);

// For a deterministic state, follows a run to the first repeated state and
// returns (z, u) with P^s(z u^omega) = 1, |z|+|u| <= n, |u| >= 1.  The pair
// is canonicalized: u reduced to its primitive period, z as short as the
// rotation structure allows.
std::pair<Word, Word> extract_lasso(const MarkovChain& chain, int state);

// Mass split of L^{-1}(w) into paths that stay branching through step
// min(k,|w|) and paths that hit a deterministic state by then.
struct PathPartitionMass {
    double b_mass = 0.0;
    double d_mass = 0.0;
};

PathPartitionMass path_partition_mass(const MarkovChain& chain, const Word& w, long long k);

// Pure word predicate: does some u with 1 <= |u| <= n make the suffix of w
// after position k a prefix of u^omega?  Returns the lexicographically
// smallest period (symbol-string order).  Positive probability of w is the
// caller's concern.
struct PeriodicityResult {
    bool periodic = false;
    Word period;
};

PeriodicityResult is_ultimately_periodic(const Word& w, long long k, int n);

// Same predicate on symbol-id traces (no witness), used on stored samples.
bool has_tail_period(std::span<const std::uint8_t> w, long long k, int n);

// Bottom strongly connected components with the pathological flag (all
// member states deterministic) and reachability from the initial support.
struct BsccInfo {
    std::vector<int> states;
    bool pathological = false;
    bool reachable = false;
};

std::vector<BsccInfo> pathological_bsccs(const MarkovChain& chain);
bool chain_is_pathological(const MarkovChain& chain);

// n^2-determinism flag per state (shared by the partition and BSCC code).
std::vector<bool> deterministic_state_flags(const MarkovChain& chain);

// Number of distinct positive-probability label words from `state`, per
// level 1..levels, saturating at `cap`.  Tracking beyond the saturation
// point keeps two live classes, which is sound because distinct words only
// ever extend to distinct words.  Used by the structural property suites.
std::vector<int> word_class_counts(const MarkovChain& chain, int state, int levels, int cap);

}  // namespace lmc
