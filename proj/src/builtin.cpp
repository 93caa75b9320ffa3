#include "lmc/builtin.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

MarkovChain fig1(double tau) {
    if (!(tau >= 0.0 && tau < 0.5)) throw DomainError("fig1: tau must be in [0, 0.5)");
    const std::string lo = num(0.5 - tau), hi = num(0.5 + tau);
    return parse_chain(R"({"states": ["s", "t"], "labels": {"s": "a", "t": "b"},)"
                       R"( "initial": "stationary",)"
                       R"( "transitions": {"s": {"s": )" + lo + R"(, "t": )" + hi + R"(},)"
                       R"( "t": {"s": )" + lo + R"(, "t": )" + hi + R"(}},)"
                       R"( "pmin": )" + lo + "}");
}

MarkovChain fig2() {
    return parse_chain(R"({
      "states": ["s", "t", "u", "w"],
      "labels": {"s": "a", "t": "a", "u": "a", "w": "b"},
      "initial": {"s": 1.0},
      "transitions": {
        "s": {"t": 1.0},
        "t": {"u": 1.0},
        "u": {"w": 1.0},
        "w": {"s": 0.5, "t": 0.5}
      },
      "pmin": 0.5
    })");
}

MarkovChain fig3(double pmin) {
    if (!(pmin > 0.0 && pmin < 1.0)) throw DomainError("fig3: pmin must be in (0,1)");
    const std::string p = num(pmin), q = num(1.0 - pmin);
    const std::string declared = num(std::min(pmin, 1.0 - pmin));
    return parse_chain(R"({"states": ["s", "t", "u", "w"],)"
                       R"( "labels": {"s": "a", "t": "a", "u": "a", "w": "b"},)"
                       R"( "initial": {"s": 1.0},)"
                       R"( "transitions": {)"
                       R"( "s": {"s": )" + q + R"(, "t": )" + p + R"(},)"
                       R"( "t": {"s": )" + q + R"(, "u": )" + p + R"(},)"
                       R"( "u": {"t": )" + q + R"(, "w": )" + p + R"(},)"
                       R"( "w": {"u": )" + q + R"(, "w": )" + p + R"(}},)"
                       R"( "pmin": )" + declared + "}");
}

MarkovChain lemma3_right() {
    return parse_chain(R"({
      "states": ["s", "t"],
      "labels": {"s": "a", "t": "a"},
      "initial": {"s": 1.0},
      "transitions": {
        "s": {"s": 0.5, "t": 0.5},
        "t": {"s": 1.0}
      },
      "pmin": 0.4
    })");
}

MarkovChain cycle_ab() {
    return parse_chain(R"({
      "states": ["s", "t"],
      "labels": {"s": "a", "t": "b"},
      "initial": {"s": 1.0},
      "transitions": {"s": {"t": 1.0}, "t": {"s": 1.0}},
      "pmin": 0.9
    })");
}

MarkovChain cycle_aa() {
    return parse_chain(R"({
      "states": ["s", "t"],
      "labels": {"s": "a", "t": "a"},
      "initial": {"s": 1.0},
      "transitions": {"s": {"t": 1.0}, "t": {"s": 1.0}},
      "pmin": 0.9
    })");
}

MarkovChain fig1_unfold() {
    return parse_chain(R"({
      "states": ["a1", "a2", "b"],
      "labels": {"a1": "a", "a2": "a", "b": "b"},
      "initial": {"a1": 0.3, "a2": 0.2, "b": 0.5},
      "transitions": {
        "a1": {"a1": 0.3, "a2": 0.2, "b": 0.5},
        "a2": {"a1": 0.3, "a2": 0.2, "b": 0.5},
        "b":  {"a1": 0.3, "a2": 0.2, "b": 0.5}
      },
      "pmin": 0.2
    })");
}

std::optional<MarkovChain> resolve_builtin(const std::string& id) {
    std::string name = id;
    std::optional<double> param;
    if (auto colon = id.find(':'); colon != std::string::npos) {
        name = id.substr(0, colon);
        try {
            param = std::stod(id.substr(colon + 1));
        } catch (const std::exception&) {
            throw DomainError("bad parameter in builtin chain id '" + id + "'");
        }
    }
    if (name == "fig1") return fig1(param.value_or(0.0));
    if (name == "fig2") return fig2();
    if (name == "fig3") return fig3(param.value_or(0.3));
    if (name == "lemma3-right") return lemma3_right();
    if (name == "cycle-ab") return cycle_ab();
    if (name == "cycle-aa") return cycle_aa();
    if (name == "fig1-unfold") return fig1_unfold();
    return std::nullopt;
}

std::vector<std::string> builtin_ids() {
    return {"fig1", "fig2", "fig3", "lemma3-right", "cycle-ab", "cycle-aa", "fig1-unfold"};
}

}  // namespace lmc
