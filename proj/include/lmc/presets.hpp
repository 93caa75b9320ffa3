#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lmc/estimator.hpp"

namespace lmc {

// Experiment presets: deterministic, seed-driven reproductions of the
// benchmark claims.  Every preset is a pure function of (preset, seed,
// overrides); reports are emitted as JSON plus a flat CSV.
struct ExperimentConfig {
    std::string preset;
    std::uint64_t seed = 42;
    int threads = 1;  // 0 = hardware concurrency
    std::string out_dir;

    // overrides; zero/empty means "preset default"
    double tau = 0.0;
    double pmin = 0.0;
    int n_bound = 0;
    double alpha = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;
    long long k = 0;
    int replications = 0;
    int chain_count = 0;                // lemma-fuzz
    std::vector<long long> steps;       // tv-demo horizons
    std::string chain_a, chain_b;       // builtin id or file path
};

struct TvRow {
    double tau = 0.0;
    long long n = 0;
    long long c_n = 0;
    double p1_exact = 0.0;
    double p2_exact = 0.0;
    double gap_exact = 0.0;
    double p1_normal = 0.0;
    double p2_normal = 0.0;
};

struct ExperimentReport {
    std::string preset;
    std::uint64_t seed = 0;
    std::vector<DistanceReport> replications;
    std::map<std::string, double> aggregates;
    std::map<std::string, double> oracle_refs;
    std::vector<TvRow> tv_rows;
    std::map<std::string, std::string> chains;  // name -> chain document
    std::vector<std::string> notes;
};

// preset in {tv-demo, fixed-k-coverage, unbounded-fig1, infinite-cycles,
// equivalence-precision, lemma-fuzz}
ExperimentReport run_preset(const ExperimentConfig& config);

// Writes report.json, summary.csv and chains/<name>.json under dir.
void emit_report(const ExperimentReport& report, const std::string& dir);

std::string report_json_text(const ExperimentReport& report);
ExperimentReport parse_report(const std::string& json_text);
std::string summary_csv_text(const ExperimentReport& report);

// fixed 12-significant-digit decimal formatting used in CSV output
std::string format_sig12(double v);

// Chain reference resolution shared with the CLI: builtin id (optionally
// "name:param") or a file path.
MarkovChain load_chain_ref(const std::string& ref);

}  // namespace lmc
