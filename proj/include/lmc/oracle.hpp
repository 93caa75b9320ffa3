#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmc/chain.hpp"

namespace lmc {

enum class HorizonMode { thm7, appendix_b };

// Truncation horizon: traces longer than k contribute at most epsilon to
// the finite-trace distance.
struct HorizonBound {
    long long k = 0;
    double epsilon = 0.0;
    HorizonMode mode = HorizonMode::thm7;
    int n = 0;
    double p_min = 0.0;
};

// thm7:       k = n^2 * ceil(log eps / log(1 - p_min^(n^2))) + 2n
// appendix_b: smallest integer k > (n^2-1) * ln eps / ln(1 - p_min^(n^2-1)),
//             valid for non-pathological chains only; requires n >= 2.
HorizonBound compute_horizon(int n, double p_min, double epsilon, HorizonMode mode);

struct DistanceValue {
    double value = 0.0;
    Word argmax_word;
    double error_bound = 0.0;
};

inline constexpr std::uint64_t kDefaultEnumerationGuard = 10'000'000;

// max over positive-support words of length k of |P1(w) - P2(w)|, by a
// depth-first sweep of the shared prefix trie.  Zero-support prefixes are
// pruned; `guard` caps the number of expanded trie nodes.
DistanceValue fixed_k_distance(const MarkovChain& c1, const MarkovChain& c2, long long k,
                               std::uint64_t guard = kDefaultEnumerationGuard);

// Per-length distances D^i for i = 1..k_max from one sweep.
std::vector<DistanceValue> distance_sweep(const MarkovChain& c1, const MarkovChain& c2,
                                          long long k_max,
                                          std::uint64_t guard = kDefaultEnumerationGuard);

// Finite-trace distance within +-epsilon: max_{i<=k} D^i at the thm7
// horizon for n = max state count and the shared pmin.
DistanceValue finite_trace_distance(const MarkovChain& c1, const MarkovChain& c2, double epsilon,
                                    std::uint64_t guard = kDefaultEnumerationGuard);

// Infinite-trace distance approximation: max contrast over ultimately
// periodic words of length K = horizon + n, certified within error_bound =
// 2 (1 - pmin^(n^2))^floor((K-2n)/n^2).
DistanceValue infinite_trace_distance_approx(const MarkovChain& c1, const MarkovChain& c2,
                                             double epsilon,
                                             std::uint64_t guard = kDefaultEnumerationGuard);

// Probabilities of the threshold event "at most floor((0.5+tau/2) n) b's in
// n steps" under the two-state i.i.d. chains with label bias 0.5 vs 0.5+tau.
// The gap is a certified lower bound on their total variation distance.
struct TvBoundPoint {
    double p1 = 0.0;
    double p2 = 0.0;
    double gap = 0.0;
    long long c_n = 0;
};

TvBoundPoint tv_lower_bound_demo(double tau, long long n_steps, bool exact);

// Trace equivalence: D^i = 0 (within 1e-9) for all i <= |c1| + |c2| - 1.
bool decide_trace_equivalence(const MarkovChain& c1, const MarkovChain& c2,
                              std::uint64_t guard = kDefaultEnumerationGuard);

}  // namespace lmc
