#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmc/chain.hpp"

namespace lmc {

// Built-in benchmark chains, embedded as JSON documents and parsed through
// the regular loader so reports can emit them verbatim for audit.
//
//   fig1(tau)      two i.i.d.-label states a/b, rows (0.5-tau, 0.5+tau),
//                  stationary initial
//   fig2           four states aaab on a cycle with a probabilistic return,
//                  6-deterministic initial state
//   fig3(pmin)     the P(aaa)=1, P(aaab)=pmin^3 ladder
//   lemma3_right   two states both labelled a; deterministic trace a^omega
//   cycle_ab       deterministic 2-cycle emitting (ab)^omega
//   cycle_aa       deterministic 2-cycle emitting a^omega
//   fig1_unfold    3-state unfolding of fig1(0), trace-equivalent, 0.1-grid

MarkovChain fig1(double tau);
MarkovChain fig2();
MarkovChain fig3(double pmin);
MarkovChain lemma3_right();
MarkovChain cycle_ab();
MarkovChain cycle_aa();
MarkovChain fig1_unfold();

// Resolves "fig1", "fig1:0.1", "fig3:0.3", "fig2", "lemma3-right",
// "cycle-ab", "cycle-aa", "fig1-unfold".  Returns nothing for unknown ids
// (callers fall back to treating the string as a file path).
std::optional<MarkovChain> resolve_builtin(const std::string& id);

std::vector<std::string> builtin_ids();

}  // namespace lmc
