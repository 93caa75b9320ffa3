#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmc {

// A finite word over the label alphabet; symbols are opaque strings.
using Word = std::vector<std::string>;

// A finite path, as indices into MarkovChain::states.
using Path = std::vector<int>;

// Finite labelled Markov chain: row-stochastic transition matrix, initial
// distribution, one label per state.  Immutable after construction /
// validation; all operations below are pure, so chains can be shared
// freely across threads.
struct MarkovChain {
    std::vector<std::string> states;
    std::vector<std::string> alphabet;  // distinct labels, declaration order
    std::vector<int> label_ids;         // state index -> alphabet index
    std::vector<double> transitions;    // row-major n x n
    std::vector<double> initial;
    std::optional<double> pmin;

    int n() const { return static_cast<int>(states.size()); }
    double p(int from, int to) const { return transitions[static_cast<size_t>(from) * states.size() + to]; }
    std::span<const double> row(int from) const {
        return {transitions.data() + static_cast<size_t>(from) * states.size(), states.size()};
    }
    int label_of(int state) const { return label_ids[state]; }
    const std::string& label_name(int state) const { return alphabet[label_ids[state]]; }

    // -1 when absent
    int state_index(std::string_view name) const;
    int symbol_index(std::string_view symbol) const;
};

// Throws ParseError naming the offending row/field if any invariant fails:
// row sums and the initial distribution within 1e-9 of 1, no negative
// entries, and (when pmin is declared) every positive entry >= pmin.
void validate_chain(const MarkovChain& chain);

// Builds and validates a chain from explicit pieces (test/builtin helper).
MarkovChain make_chain(std::vector<std::string> states, std::vector<std::string> labels,
                       std::vector<double> transitions, std::vector<double> initial,
                       std::optional<double> pmin = std::nullopt);

// Parses the JSON chain document.  Omitted transition entries mean 0,
// "initial": "stationary" resolves through stationary_distribution, and
// "pmin" is optional.
MarkovChain parse_chain(const std::string& json_text);
MarkovChain parse_chain_file(const std::string& path);

// Serializes back to the same JSON schema (audit output).
std::string chain_to_json(const MarkovChain& chain);

// P(w) of the label word under the trace measure, by forward pass.
// Exact up to rounding; switches to compensated summation on long words.
double word_probability(const MarkovChain& chain, const Word& w);
double word_probability(const MarkovChain& chain, std::span<const int> symbol_ids);

// Solves pi P = pi, sum(pi) = 1 by direct linear solve; requires an
// irreducible chain and certifies the residual below 1e-12.
std::vector<double> stationary_distribution(const MarkovChain& chain);

// Copy with the initial distribution replaced (validated).
MarkovChain with_initial(const MarkovChain& chain, std::vector<double> dist);

// Indicator initial distribution on one state (the measure started at s).
MarkovChain started_at(const MarkovChain& chain, int state);

// Checks that consecutive states have positive transition probability and
// the first state has positive initial mass.
bool is_valid_path(const MarkovChain& chain, const Path& path);

// Word helpers: text is either one symbol per character or a
// comma-separated symbol list; symbols are checked against the alphabet.
Word parse_word(const MarkovChain& chain, std::string_view text);
std::string format_word(const Word& w);

// Union of the two alphabets, first chain's declaration order first.
std::vector<std::string> union_alphabet(const MarkovChain& a, const MarkovChain& b);

// min over declared pmin values, falling back to the smallest positive
// transition/initial entry for chains without a declaration.
double shared_pmin(const MarkovChain& a, const MarkovChain& b);
double effective_pmin(const MarkovChain& chain);

}  // namespace lmc
