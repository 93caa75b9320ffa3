#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmc/chain.hpp"
#include "lmc/sampler.hpp"

namespace lmc {

// One multinomial contrast: empirical word probabilities under both chains
// with the combined standard-error term S_j of the simultaneous intervals.
struct ContrastEstimate {
    Word word;  // empty for the pooled never-observed cell
    double p1 = 0.0;
    double p2 = 0.0;
    double delta = 0.0;  // |p1 - p2|
    double s = 0.0;      // sqrt((p1-p1^2)/n1 + (p2-p2^2)/n2)
};

struct GoodmanParameters {
    double alpha = 0.0;
    double degrees_of_freedom = 0.0;  // |Sigma|^k, may round to inf for large k
    double m = 0.0;                   // sqrt of the chi-square quantile at 1-alpha
};

struct GoodmanResult {
    std::vector<ContrastEstimate> contrasts;
    GoodmanParameters params;
};

// Simultaneous confidence half-widths S_j * M for every observed contrast,
// plus one pooled unseen cell whose half-width is 0 by the S_j formula.
// That zero is the plug-in estimator's known weak spot: cells never
// observed in either sample claim certainty they do not have.
GoodmanResult goodman_intervals(const TraceCounts& counts, double alpha);

// Per-length summary of the contrasts in a pooled pair of batches.  The
// long-horizon drivers compute these on a sorted trace pool instead of
// materializing per-length counts; the tests cross-check this route
// against goodman_intervals over prefix_counts.
struct ContrastSummary {
    double max_delta = 0.0;
    double max_s = 0.0;
};

std::vector<ContrastSummary> pooled_length_stats(const SampleBatch& batch1,
                                                 const SampleBatch& batch2);

enum class CiMethod { goodman, bonferroni_hoeffding };
std::string to_string(CiMethod m);
CiMethod ci_method_from_string(const std::string& name);

enum class EstimateMode { fixed_k, unbounded, infinite, equivalence };
std::string to_string(EstimateMode m);

struct DistanceReport {
    EstimateMode mode = EstimateMode::fixed_k;
    double lo = 0.0;
    double hi = 1.0;
    double point = 0.0;
    long long k = 0;
    std::uint64_t samples1 = 0;
    std::uint64_t samples2 = 0;
    double alpha = 0.0;
    double delta = 0.0;
    CiMethod ci = CiMethod::goodman;
    SeedLineage lineage1;
    SeedLineage lineage2;
    bool conforming = false;
    bool state_observation_used = false;
    std::string note;
};

std::string report_to_json(const DistanceReport& report);
DistanceReport report_from_json(const std::string& json_text);

struct EstimatorOptions {
    std::uint64_t batch_size = 10'000;        // traces per chain per round
    std::uint64_t sample_cap = 100'000'000;   // total traces across both chains
    CiMethod ci = CiMethod::goodman;
    long long max_horizon = 100'000;          // refuse absurd trace lengths
    std::uint64_t memory_budget = 1ull << 30; // bytes of stored traces
};

// Samples length-k traces from both chains until, per the chosen method,
// every contrast is known within epsilon_target at confidence 1 - alpha;
// the reported interval is point +- epsilon_target clipped to [0,1].
DistanceReport estimate_fixed_k(Sampler& s1, Sampler& s2, long long k, double alpha,
                                double epsilon_target, const EstimatorOptions& options = {});

// Unbounded-length driver: one pool of length-k traces at the thm7 horizon
// for epsilon = delta/2, simultaneous intervals across all prefix lengths
// at confidence 1 - alpha/k each, statistical budget delta/4.
DistanceReport estimate_unbounded(Sampler& s1, Sampler& s2, double p_min, int n, double alpha,
                                  double delta, const EstimatorOptions& options = {});

// Infinite-trace estimator: contrasts restricted to ultimately periodic
// words of length K = horizon + n; interval widened by the structural
// truncation bound.  Retries once with K + n^2 when the width misses delta.
DistanceReport estimate_infinite(Sampler& s1, Sampler& s2, double p_min, int n, double alpha,
                                 double delta, const EstimatorOptions& options = {});

struct LearnOptions {
    long long trace_length = 16;
    std::uint64_t batch_traces = 512;
    std::uint64_t step_cap = 50'000'000;  // observed state steps before giving up
};

// Transition matrix and initial distribution with every probability an
// exact multiple of the grid g = 1/m.
struct LearnedChain {
    MarkovChain chain;
    double confidence = 0.0;
    bool grid_consistent = true;
    bool partial = false;
    std::vector<std::string> unresolved;  // states never visited
    std::uint64_t traces_used = 0;
};

// Learns rows from observed state bigrams until every entry's Hoeffding
// half-width is below g/2 at per-entry confidence 1 - alpha/(n^2+n), then
// snaps to the grid.  Requires a state-observable sampler.
LearnedChain learn_chain_finite_precision(Sampler& sampler, double grid, double alpha,
                                          const LearnOptions& options = {});

struct EquivalenceDecision {
    bool equivalent = false;
    double confidence = 0.0;
    DistanceReport report;
    LearnedChain learned1;
    LearnedChain learned2;
};

// Learns both chains at confidence 1 - alpha/2 each and decides trace
// equivalence white-box on the learned models.
EquivalenceDecision decide_equivalence_black_box(Sampler& s1, Sampler& s2, double grid,
                                                 double alpha, const LearnOptions& options = {});

}  // namespace lmc
