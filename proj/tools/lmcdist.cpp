#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmc/builtin.hpp"
#include "lmc/errors.hpp"
#include "lmc/estimator.hpp"
#include "lmc/oracle.hpp"
#include "lmc/presets.hpp"
#include "lmc/structure.hpp"

namespace {

using nlohmann::ordered_json;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw lmc::Error("cannot write '" + out_path + "'");
    out << text << "\n";
}

ordered_json distance_value_json(const lmc::DistanceValue& v) {
    return ordered_json{{"value", v.value},
                        {"argmax_word", lmc::format_word(v.argmax_word)},
                        {"error_bound", v.error_bound}};
}

int run_estimate(const std::string& chain_a, const std::string& chain_b, const std::string& mode,
                 long long k, double pmin, int nmax, double alpha, double delta,
                 const std::string& ci, double grid, std::uint64_t seed,
                 const lmc::EstimatorOptions& base_options, const std::string& out) {
    lmc::EstimatorOptions options = base_options;
    options.ci = lmc::ci_method_from_string(ci);

    lmc::MarkovChain a = lmc::load_chain_ref(chain_a);
    lmc::MarkovChain b = lmc::load_chain_ref(chain_b);
    if (pmin == 0.0 && (mode == "unbounded" || mode == "infinite")) {
        if (!a.pmin || !b.pmin)
            throw lmc::DomainError("--pmin required when a chain declares no pmin");
        pmin = lmc::shared_pmin(a, b);
    }

    lmc::DistanceReport report;
    if (mode == "fixed-k") {
        if (k < 1) throw lmc::DomainError("--k is required for fixed-k mode");
        lmc::Sampler s1(a, seed, 0), s2(b, seed, 1);
        report = lmc::estimate_fixed_k(s1, s2, k, alpha, delta / 2.0, options);
    } else if (mode == "unbounded") {
        if (nmax < 1) throw lmc::DomainError("--nmax is required for unbounded mode");
        lmc::Sampler s1(a, seed, 0), s2(b, seed, 1);
        report = lmc::estimate_unbounded(s1, s2, pmin, nmax, alpha, delta, options);
    } else if (mode == "infinite") {
        if (nmax < 1) throw lmc::DomainError("--nmax is required for infinite mode");
        lmc::Sampler s1(a, seed, 0), s2(b, seed, 1);
        report = lmc::estimate_infinite(s1, s2, pmin, nmax, alpha, delta, options);
    } else if (mode == "equiv") {
        if (grid == 0.0) throw lmc::DomainError("--grid is required for equiv mode");
        lmc::Sampler s1(a, seed, 0, true), s2(b, seed, 1, true);
        auto decision = lmc::decide_equivalence_black_box(s1, s2, grid, alpha);
        report = decision.report;
        std::cerr << (decision.equivalent ? "equivalent" : "not equivalent")
                  << " (confidence " << 1.0 - alpha << ")\n";
    } else {
        throw lmc::DomainError("unknown mode '" + mode + "'");
    }

    write_output(lmc::report_to_json(report), out);
    return report.conforming ? 0 : 2;
}

int run_oracle(const std::string& sub, const std::string& chain_a, const std::string& chain_b,
               double epsilon, long long k, double tau, long long steps, bool exact,
               const std::string& out) {
    if (sub == "demo-tv") {
        auto point = lmc::tv_lower_bound_demo(tau, steps, exact);
        write_output(ordered_json{{"tau", tau},
                                  {"n", steps},
                                  {"c_n", point.c_n},
                                  {"p1", point.p1},
                                  {"p2", point.p2},
                                  {"gap", point.gap},
                                  {"exact", exact}}
                         .dump(2),
                     out);
        return 0;
    }

    lmc::MarkovChain a = lmc::load_chain_ref(chain_a);
    lmc::MarkovChain b = lmc::load_chain_ref(chain_b);
    if (sub == "dk") {
        if (k < 1) throw lmc::DomainError("--k is required for oracle dk");
        write_output(distance_value_json(lmc::fixed_k_distance(a, b, k)).dump(2), out);
    } else if (sub == "finite") {
        write_output(distance_value_json(lmc::finite_trace_distance(a, b, epsilon)).dump(2), out);
    } else if (sub == "infinite") {
        write_output(distance_value_json(lmc::infinite_trace_distance_approx(a, b, epsilon)).dump(2),
                     out);
    } else if (sub == "equiv") {
        bool eq = lmc::decide_trace_equivalence(a, b);
        write_output(ordered_json{{"equivalent", eq}}.dump(2), out);
    } else {
        throw lmc::DomainError("unknown oracle subcommand '" + sub + "'");
    }
    return 0;
}

int run_analyze(const std::string& chain_ref, const std::string& out) {
    lmc::MarkovChain chain = lmc::load_chain_ref(chain_ref);
    const int n = chain.n();

    ordered_json result;
    result["states"] = ordered_json::array();
    for (int s = 0; s < n; ++s) {
        auto cls = lmc::classify_state(chain, s, n * n);
        ordered_json entry;
        entry["state"] = chain.states[s];
        entry["label"] = chain.label_name(s);
        if (cls.branching_threshold) {
            entry["branching_threshold"] = *cls.branching_threshold;
            ordered_json witnesses = ordered_json::array();
            for (const auto& w : cls.witness_words) witnesses.push_back(lmc::format_word(w));
            entry["witness_words"] = witnesses;
        } else {
            entry["branching_threshold"] = "deterministic";
            entry["lasso"] = ordered_json{{"z", lmc::format_word(cls.lasso->first)},
                                          {"u", lmc::format_word(cls.lasso->second)}};
        }
        result["states"].push_back(entry);
    }
    result["bsccs"] = ordered_json::array();
    for (const auto& bscc : lmc::pathological_bsccs(chain)) {
        ordered_json entry;
        ordered_json members = ordered_json::array();
        for (int s : bscc.states) members.push_back(chain.states[s]);
        entry["states"] = members;
        entry["pathological"] = bscc.pathological;
        entry["reachable"] = bscc.reachable;
        result["bsccs"].push_back(entry);
    }
    result["pathological"] = lmc::chain_is_pathological(chain);
    write_output(result.dump(2), out);
    return 0;
}

int run_sample(const std::string& chain_ref, long long length, std::uint64_t count,
               std::uint64_t seed, std::uint64_t stream, bool observe_states,
               const std::string& out) {
    lmc::MarkovChain chain = lmc::load_chain_ref(chain_ref);
    auto batch = lmc::sample(chain, length, count, seed, stream, 0, observe_states);

    std::string text;
    for (std::uint64_t i = 0; i < batch.count; ++i) {
        text += lmc::format_word(batch.trace_word(i));
        if (observe_states) {
            text += "\t";
            auto path = batch.state_path(i);
            for (size_t j = 0; j < path.size(); ++j) {
                if (j) text += ",";
                text += chain.states[path[j]];
            }
        }
        text += "\n";
    }
    if (!text.empty()) text.pop_back();
    write_output(text, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace-distance estimation for labelled Markov chains"};
    app.require_subcommand(1);
    app.fallthrough();  // accept the global flags after a subcommand too

    std::uint64_t seed = 42;
    std::string out;
    int threads = 1;
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out, "output file (JSON) or directory for presets");
    app.add_option("--threads", threads, "worker threads for presets (0 = auto)");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "black-box distance estimation");
    std::string chain_a, chain_b, mode = "fixed-k", ci = "goodman";
    long long k = 0;
    double pmin = 0.0, alpha = 0.05, delta = 0.1, grid = 0.0;
    int nmax = 0;
    lmc::EstimatorOptions est_options;
    estimate->add_option("--chain-a", chain_a, "first chain (file or builtin id)")->required();
    estimate->add_option("--chain-b", chain_b, "second chain (file or builtin id)")->required();
    estimate->add_option("--mode", mode, "fixed-k|unbounded|infinite|equiv");
    estimate->add_option("--k", k, "trace length for fixed-k mode");
    estimate->add_option("--pmin", pmin, "lower bound on positive transition probabilities");
    estimate->add_option("--nmax", nmax, "state-count bound (unbounded/infinite modes)");
    estimate->add_option("--alpha", alpha, "confidence parameter");
    estimate->add_option("--delta", delta, "target interval width");
    estimate->add_option("--ci", ci, "goodman|bonferroni-hoeffding");
    estimate->add_option("--grid", grid, "finite-precision grid for equiv mode");
    estimate->add_option("--batch", est_options.batch_size, "traces per chain per round");
    estimate->add_option("--cap", est_options.sample_cap, "total trace budget");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "exact white-box computations");
    std::string oracle_sub, o_chain_a, o_chain_b;
    double o_epsilon = 0.1, o_tau = 0.1;
    long long o_k = 0, o_steps = 100;
    bool o_exact = false;
    oracle->add_option("what", oracle_sub, "dk|finite|infinite|equiv|demo-tv")->required();
    oracle->add_option("--chain-a", o_chain_a, "first chain");
    oracle->add_option("--chain-b", o_chain_b, "second chain");
    oracle->add_option("--epsilon", o_epsilon, "approximation error");
    oracle->add_option("--k", o_k, "word length for dk");
    oracle->add_option("--tau", o_tau, "bias shift for demo-tv");
    oracle->add_option("--steps", o_steps, "prefix length for demo-tv");
    oracle->add_flag("--exact", o_exact, "exact binomial tails in demo-tv");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "structural classification report");
    std::string a_chain;
    analyze->add_option("chain", a_chain, "chain to analyze")->required();

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "dump simulation traces");
    std::string s_chain;
    long long s_length = 10;
    std::uint64_t s_count = 10, s_stream = 0;
    bool s_observe = false;
    sample_cmd->add_option("chain", s_chain, "chain to simulate")->required();
    sample_cmd->add_option("--length", s_length, "trace length");
    sample_cmd->add_option("--count", s_count, "number of traces");
    sample_cmd->add_option("--stream", s_stream, "stream id");
    sample_cmd->add_flag("--observe-states", s_observe, "also dump state paths");

    // demo
    auto* demo = app.add_subcommand("demo", "distance lower-bound demonstrations");
    std::string demo_sub;
    double d_tau = 0.1;
    long long d_steps = 100;
    bool d_exact = true;
    demo->add_option("what", demo_sub, "tv")->required();
    demo->add_option("--tau", d_tau, "bias shift");
    demo->add_option("--steps", d_steps, "prefix length");
    demo->add_flag("!--no-exact", d_exact, "use the normal approximation instead");

    // preset
    auto* preset = app.add_subcommand("preset", "run a named experiment preset");
    lmc::ExperimentConfig config;
    preset->add_option("name", config.preset,
                       "tv-demo|fixed-k-coverage|unbounded-fig1|infinite-cycles|"
                       "equivalence-precision|lemma-fuzz")
        ->required();
    preset->add_option("--tau", config.tau, "bias shift override");
    preset->add_option("--pmin", config.pmin, "pmin override");
    preset->add_option("--nmax", config.n_bound, "state bound override");
    preset->add_option("--alpha", config.alpha, "confidence override");
    preset->add_option("--delta", config.delta, "width override");
    preset->add_option("--epsilon", config.epsilon, "target precision / grid override");
    preset->add_option("--k", config.k, "length override");
    preset->add_option("--replications", config.replications, "replication count");
    preset->add_option("--chains", config.chain_count, "chain count for lemma-fuzz");
    preset->add_option("--chain-a", config.chain_a, "chain override");
    preset->add_option("--chain-b", config.chain_b, "chain override");
    preset->add_option("--tv-steps", config.steps, "tv-demo prefix lengths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 0 for --help, 1 for usage errors
    }

    try {
        if (*estimate)
            return run_estimate(chain_a, chain_b, mode, k, pmin, nmax, alpha, delta, ci, grid,
                                seed, est_options, out);
        if (*oracle) return run_oracle(oracle_sub, o_chain_a, o_chain_b, o_epsilon, o_k, o_tau,
                                       o_steps, o_exact, out);
        if (*analyze) return run_analyze(a_chain, out);
        if (*sample_cmd) return run_sample(s_chain, s_length, s_count, seed, s_stream, s_observe, out);
        if (*demo) {
            if (demo_sub != "tv") throw lmc::DomainError("unknown demo '" + demo_sub + "'");
            auto point = lmc::tv_lower_bound_demo(d_tau, d_steps, d_exact);
            write_output(ordered_json{{"tau", d_tau},
                                      {"n", d_steps},
                                      {"c_n", point.c_n},
                                      {"p1", point.p1},
                                      {"p2", point.p2},
                                      {"gap", point.gap},
                                      {"exact", d_exact}}
                             .dump(2),
                         out);
            return 0;
        }
        if (*preset) {
            config.seed = seed;
            config.threads = threads;
            config.out_dir = out;
            auto report = lmc::run_preset(config);
            if (out.empty()) std::cout << lmc::report_json_text(report) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
