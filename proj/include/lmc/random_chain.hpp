#pragma once

#include "lmc/chain.hpp"
#include "lmc/rng.hpp"

namespace lmc {

// Random chains for the structural property fuzz.  Probabilities are integer
// multiples of 1/denominator, so the declared pmin (the smallest positive
// entry) is honest by construction.  A slice of the draws carves out a
// reachable deterministic cycle so the pathological regime is exercised.
struct RandomChainSpec {
    int min_states = 2;
    int max_states = 4;
    int max_alphabet = 3;
    int denominator = 10;        // grid of probabilities; pmin >= 1/denominator
    double det_cycle_prob = 0.3; // chance of embedding a deterministic cycle
};

MarkovChain random_chain(Xoshiro256ss& rng, const RandomChainSpec& spec = {});

}  // namespace lmc
