#include "lmc/chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lmc/errors.hpp"

namespace lmc {

namespace {

constexpr double kStochasticTol = 1e-9;
constexpr double kPminSlack = 1e-12;
constexpr double kStationaryResidual = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

int MarkovChain::state_index(std::string_view name) const {
    for (int i = 0; i < n(); ++i)
        if (states[i] == name) return i;
    return -1;
}

int MarkovChain::symbol_index(std::string_view symbol) const {
    for (size_t i = 0; i < alphabet.size(); ++i)
        if (alphabet[i] == symbol) return static_cast<int>(i);
    return -1;
}

void validate_chain(const MarkovChain& chain) {
    const int n = chain.n();
    if (n == 0) throw ParseError("chain has no states");
    if (chain.label_ids.size() != static_cast<size_t>(n) ||
        chain.transitions.size() != static_cast<size_t>(n) * n ||
        chain.initial.size() != static_cast<size_t>(n))
        throw ParseError("chain field sizes are inconsistent");

    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = chain.p(i, j);
            if (v < 0.0)
                throw ParseError("transition " + chain.states[i] + "->" + chain.states[j] +
                                 " is negative (" + fmt(v) + ")");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > kStochasticTol)
            throw ParseError("transition row for state '" + chain.states[i] + "' sums to " +
                             fmt(sum) + ", expected 1 within 1e-9");
    }

    double isum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (chain.initial[i] < 0.0)
            throw ParseError("initial entry for state '" + chain.states[i] + "' is negative");
        isum += chain.initial[i];
    }
    if (std::fabs(isum - 1.0) > kStochasticTol)
        throw ParseError("initial distribution sums to " + fmt(isum) + ", expected 1 within 1e-9");

    if (chain.pmin) {
        double pmin = *chain.pmin;
        if (!(pmin > 0.0 && pmin <= 1.0)) throw ParseError("pmin must be in (0,1]");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = chain.p(i, j);
                if (v > 0.0 && v < pmin - kPminSlack)
                    throw ParseError("transition " + chain.states[i] + "->" + chain.states[j] +
                                     " = " + fmt(v) + " is positive but below declared pmin " +
                                     fmt(pmin));
            }
        for (int i = 0; i < n; ++i)
            if (chain.initial[i] > 0.0 && chain.initial[i] < pmin - kPminSlack)
                throw ParseError("initial entry for state '" + chain.states[i] + "' = " +
                                 fmt(chain.initial[i]) + " is positive but below declared pmin " +
                                 fmt(pmin));
    }
}

MarkovChain make_chain(std::vector<std::string> states, std::vector<std::string> labels,
                       std::vector<double> transitions, std::vector<double> initial,
                       std::optional<double> pmin) {
    if (labels.size() != states.size()) throw ParseError("one label per state required");
    MarkovChain chain;
    chain.states = std::move(states);
    chain.transitions = std::move(transitions);
    chain.initial = std::move(initial);
    chain.pmin = pmin;
    chain.label_ids.resize(chain.states.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        int id = -1;
        for (size_t a = 0; a < chain.alphabet.size(); ++a)
            if (chain.alphabet[a] == labels[i]) id = static_cast<int>(a);
        if (id < 0) {
            id = static_cast<int>(chain.alphabet.size());
            chain.alphabet.push_back(labels[i]);
        }
        chain.label_ids[i] = id;
    }
    validate_chain(chain);
    return chain;
}

namespace {

using nlohmann::json;

MarkovChain chain_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("chain document must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (key != "states" && key != "labels" && key != "initial" && key != "transitions" &&
            key != "pmin")
            throw ParseError("unknown field '" + key + "' in chain document");

    if (!doc.contains("states") || !doc["states"].is_array() || doc["states"].empty())
        throw ParseError("'states' must be a non-empty array");
    std::vector<std::string> states;
    for (const auto& s : doc["states"]) {
        if (!s.is_string() || s.get<std::string>().empty())
            throw ParseError("'states' entries must be non-empty strings");
        states.push_back(s.get<std::string>());
    }
    for (size_t i = 0; i < states.size(); ++i)
        for (size_t j = i + 1; j < states.size(); ++j)
            if (states[i] == states[j]) throw ParseError("duplicate state '" + states[i] + "'");

    auto index_of = [&](const std::string& name, const std::string& where) {
        for (size_t i = 0; i < states.size(); ++i)
            if (states[i] == name) return static_cast<int>(i);
        throw ParseError(where + " references unknown state '" + name + "'");
    };

    if (!doc.contains("labels") || !doc["labels"].is_object())
        throw ParseError("'labels' must map every state to a symbol");
    std::vector<std::string> labels(states.size());
    std::vector<bool> labelled(states.size(), false);
    for (const auto& [name, value] : doc["labels"].items()) {
        int i = index_of(name, "labels");
        if (!value.is_string() || value.get<std::string>().empty())
            throw ParseError("label for state '" + name + "' must be a non-empty string");
        labels[i] = value.get<std::string>();
        labelled[i] = true;
    }
    for (size_t i = 0; i < states.size(); ++i)
        if (!labelled[i]) throw ParseError("state '" + states[i] + "' has no label");

    const size_t n = states.size();
    std::vector<double> transitions(n * n, 0.0);
    if (!doc.contains("transitions") || !doc["transitions"].is_object())
        throw ParseError("'transitions' must be an object of rows");
    for (const auto& [from, rowv] : doc["transitions"].items()) {
        int i = index_of(from, "transitions");
        if (!rowv.is_object())
            throw ParseError("transition row for state '" + from + "' must be an object");
        for (const auto& [to, value] : rowv.items()) {
            int j = index_of(to, "transitions row '" + from + "'");
            if (!value.is_number())
                throw ParseError("transition " + from + "->" + to + " must be a number");
            transitions[static_cast<size_t>(i) * n + j] = value.get<double>();
        }
    }

    std::optional<double> pmin;
    if (doc.contains("pmin")) {
        if (!doc["pmin"].is_number()) throw ParseError("'pmin' must be a number");
        pmin = doc["pmin"].get<double>();
    }

    if (!doc.contains("initial")) throw ParseError("'initial' is required");
    bool stationary_directive = doc["initial"].is_string();
    if (stationary_directive && doc["initial"].get<std::string>() != "stationary")
        throw ParseError("'initial' must be a distribution object or the string \"stationary\"");

    std::vector<double> initial(n, 0.0);
    if (!stationary_directive) {
        if (!doc["initial"].is_object())
            throw ParseError("'initial' must be a distribution object or the string \"stationary\"");
        for (const auto& [name, value] : doc["initial"].items()) {
            int i = index_of(name, "initial");
            if (!value.is_number())
                throw ParseError("initial entry for state '" + name + "' must be a number");
            initial[i] = value.get<double>();
        }
    } else {
        initial[0] = 1.0;  // placeholder until the directive resolves
    }

    MarkovChain chain = make_chain(std::move(states), std::move(labels), std::move(transitions),
                                   std::move(initial), pmin);
    if (stationary_directive) chain = with_initial(chain, stationary_distribution(chain));
    return chain;
}

}  // namespace

MarkovChain parse_chain(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("chain document is not valid JSON: ") + e.what());
    }
    return chain_from_json(doc);
}

MarkovChain parse_chain_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open chain file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_chain(buf.str());
}

std::string chain_to_json(const MarkovChain& chain) {
    nlohmann::ordered_json doc;
    doc["states"] = chain.states;
    nlohmann::ordered_json labels;
    for (int i = 0; i < chain.n(); ++i) labels[chain.states[i]] = chain.label_name(i);
    doc["labels"] = labels;
    nlohmann::ordered_json initial;
    for (int i = 0; i < chain.n(); ++i)
        if (chain.initial[i] != 0.0) initial[chain.states[i]] = chain.initial[i];
    doc["initial"] = initial;
    nlohmann::ordered_json rows;
    for (int i = 0; i < chain.n(); ++i) {
        nlohmann::ordered_json row;
        for (int j = 0; j < chain.n(); ++j)
            if (chain.p(i, j) != 0.0) row[chain.states[j]] = chain.p(i, j);
        rows[chain.states[i]] = row;
    }
    doc["transitions"] = rows;
    if (chain.pmin) doc["pmin"] = *chain.pmin;
    return doc.dump(2);
}

namespace {

// One forward step restricted to targets carrying the given symbol.
// Compensated accumulation is switched on for long words, where the
// repeated n-term sums otherwise lose digits.
void forward_step(const MarkovChain& chain, int symbol, const std::vector<double>& alpha,
                  std::vector<double>& next, bool compensated) {
    const int n = chain.n();
    for (int t = 0; t < n; ++t) {
        if (chain.label_of(t) != symbol) {
            next[t] = 0.0;
            continue;
        }
        if (compensated) {
            double sum = 0.0, comp = 0.0;
            for (int s = 0; s < n; ++s) {
                double y = alpha[s] * chain.p(s, t) - comp;
                double v = sum + y;
                comp = (v - sum) - y;
                sum = v;
            }
            next[t] = sum;
        } else {
            double sum = 0.0;
            for (int s = 0; s < n; ++s) sum += alpha[s] * chain.p(s, t);
            next[t] = sum;
        }
    }
}

}  // namespace

double word_probability(const MarkovChain& chain, std::span<const int> symbol_ids) {
    if (symbol_ids.empty()) throw DomainError("word_probability: word must be non-empty");
    const int n = chain.n();
    for (int id : symbol_ids)
        if (id < 0 || id >= static_cast<int>(chain.alphabet.size()))
            throw DomainError("word_probability: symbol not in chain alphabet");

    const bool compensated = static_cast<long long>(n) * symbol_ids.size() > 10'000;
    std::vector<double> alpha(n), next(n);
    for (int s = 0; s < n; ++s) alpha[s] = chain.label_of(s) == symbol_ids[0] ? chain.initial[s] : 0.0;
    for (size_t i = 1; i < symbol_ids.size(); ++i) {
        forward_step(chain, symbol_ids[i], alpha, next, compensated);
        alpha.swap(next);
    }
    double total = 0.0, comp = 0.0;
    for (int s = 0; s < n; ++s) {
        double y = alpha[s] - comp;
        double v = total + y;
        comp = (v - total) - y;
        total = v;
    }
    return total;
}

double word_probability(const MarkovChain& chain, const Word& w) {
    std::vector<int> ids;
    ids.reserve(w.size());
    for (const auto& sym : w) {
        int id = chain.symbol_index(sym);
        if (id < 0) throw DomainError("word_probability: symbol '" + sym + "' not in chain alphabet");
        ids.push_back(id);
    }
    return word_probability(chain, ids);
}

namespace {

bool strongly_connected(const MarkovChain& chain) {
    const int n = chain.n();
    auto reach = [&](bool reversed) {
        std::vector<bool> seen(n, false);
        std::vector<int> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            for (int t = 0; t < n; ++t) {
                double v = reversed ? chain.p(t, s) : chain.p(s, t);
                if (v > 0.0 && !seen[t]) {
                    seen[t] = true;
                    stack.push_back(t);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    };
    return reach(false) && reach(true);
}

}  // namespace

std::vector<double> stationary_distribution(const MarkovChain& chain) {
    const int n = chain.n();
    if (!strongly_connected(chain))
        throw DomainError("stationary_distribution: chain is not irreducible");

    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = chain.p(j, i) - (i == j ? 1.0 : 0.0);
    for (int j = 0; j < n; ++j) a(n - 1, j) = 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw DomainError("stationary_distribution: singular system");
    Eigen::VectorXd pi = lu.solve(b);

    std::vector<double> result(n);
    for (int i = 0; i < n; ++i) {
        if (pi(i) < -kStationaryResidual)
            throw Error("stationary_distribution: negative component in solution");
        result[i] = std::max(0.0, pi(i));
    }
    double residual = 0.0;
    for (int j = 0; j < n; ++j) {
        double v = -result[j];
        for (int i = 0; i < n; ++i) v += result[i] * chain.p(i, j);
        residual = std::max(residual, std::fabs(v));
    }
    if (residual > kStationaryResidual)
        throw Error("stationary_distribution: residual " + fmt(residual) + " exceeds 1e-12");
    return result;
}

MarkovChain with_initial(const MarkovChain& chain, std::vector<double> dist) {
    if (dist.size() != static_cast<size_t>(chain.n()))
        throw DomainError("with_initial: distribution length does not match state count");
    MarkovChain copy = chain;
    copy.initial = std::move(dist);
    validate_chain(copy);
    return copy;
}

MarkovChain started_at(const MarkovChain& chain, int state) {
    if (state < 0 || state >= chain.n()) throw DomainError("started_at: unknown state");
    std::vector<double> dist(chain.n(), 0.0);
    dist[state] = 1.0;
    return with_initial(chain, std::move(dist));
}

bool is_valid_path(const MarkovChain& chain, const Path& path) {
    if (path.empty()) return false;
    for (int s : path)
        if (s < 0 || s >= chain.n()) return false;
    if (!(chain.initial[path[0]] > 0.0)) return false;
    for (size_t i = 0; i + 1 < path.size(); ++i)
        if (!(chain.p(path[i], path[i + 1]) > 0.0)) return false;
    return true;
}

Word parse_word(const MarkovChain& chain, std::string_view text) {
    Word w;
    if (text.find(',') != std::string_view::npos) {
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t next = text.find(',', pos);
            if (next == std::string_view::npos) next = text.size();
            w.emplace_back(text.substr(pos, next - pos));
            pos = next + 1;
        }
    } else {
        for (char c : text) w.emplace_back(1, c);
    }
    if (w.empty()) throw DomainError("empty word");
    for (const auto& sym : w)
        if (chain.symbol_index(sym) < 0)
            throw DomainError("word symbol '" + sym + "' not in chain alphabet");
    return w;
}

std::string format_word(const Word& w) {
    bool single = std::all_of(w.begin(), w.end(), [](const std::string& s) { return s.size() == 1; });
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (!single && i) out += ',';
        out += w[i];
    }
    return out;
}

std::vector<std::string> union_alphabet(const MarkovChain& a, const MarkovChain& b) {
    std::vector<std::string> result = a.alphabet;
    for (const auto& sym : b.alphabet)
        if (std::find(result.begin(), result.end(), sym) == result.end()) result.push_back(sym);
    return result;
}

double effective_pmin(const MarkovChain& chain) {
    if (chain.pmin) return *chain.pmin;
    double best = 1.0;
    for (double v : chain.transitions)
        if (v > 0.0) best = std::min(best, v);
    for (double v : chain.initial)
        if (v > 0.0) best = std::min(best, v);
    return best;
}

double shared_pmin(const MarkovChain& a, const MarkovChain& b) {
    return std::min(effective_pmin(a), effective_pmin(b));
}

}  // namespace lmc
