#include <cmath>

#include "doctest.h"
#include "lmc/builtin.hpp"
#include "lmc/errors.hpp"
#include "lmc/oracle.hpp"
#include "lmc/random_chain.hpp"
#include "lmc/structure.hpp"
#include "support.hpp"

using namespace lmc;
using testsupport::word_of;

TEST_CASE("compute_horizon formulas") {
    auto thm = compute_horizon(2, 0.5, 0.1, HorizonMode::thm7);
    CHECK(thm.k == 148);  // 4 * ceil(35.677) + 4

    auto app = compute_horizon(2, 0.5, 0.1, HorizonMode::appendix_b);
    CHECK(app.k == 52);  // smallest integer above 51.731

    // n = 1 instantiation: ceil(log eps / log(1-p)) + 2
    auto one = compute_horizon(1, 0.5, 0.1, HorizonMode::thm7);
    CHECK(one.k == 6);

    CHECK_THROWS_AS(compute_horizon(1, 0.5, 0.1, HorizonMode::appendix_b), DomainError);
    CHECK_THROWS_AS(compute_horizon(0, 0.5, 0.1, HorizonMode::thm7), DomainError);
    CHECK_THROWS_AS(compute_horizon(2, 1.0, 0.1, HorizonMode::thm7), DomainError);
    CHECK_THROWS_AS(compute_horizon(2, 0.5, 1.5, HorizonMode::thm7), DomainError);
}

TEST_CASE("fixed_k_distance on the two-state pair") {
    auto base = fig1(0.0), shifted = fig1(0.1);

    auto d1 = fixed_k_distance(base, shifted, 1);
    CHECK(std::fabs(d1.value - 0.1) <= 1e-12);
    CHECK((d1.argmax_word == word_of("a") || d1.argmax_word == word_of("b")));
    CHECK(d1.error_bound == 0.0);

    auto d2 = fixed_k_distance(base, shifted, 2);
    CHECK(std::fabs(d2.value - 0.11) <= 1e-12);
    CHECK(d2.argmax_word == word_of("bb"));

    auto same = fixed_k_distance(base, base, 3);
    CHECK(same.value == 0.0);
}

TEST_CASE("fixed_k_distance equals unpruned enumeration on random pairs") {
    Xoshiro256ss rng(31, 0, 0);
    RandomChainSpec spec;
    spec.max_states = 3;
    for (int trial = 0; trial < 15; ++trial) {
        auto a = random_chain(rng, spec), b = random_chain(rng, spec);
        for (int k = 1; k <= 5; ++k) {
            double brute = testsupport::brute_fixed_k_distance(a, b, k);
            CHECK(fixed_k_distance(a, b, k).value == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("enumeration guard") {
    auto base = fig1(0.0), shifted = fig1(0.1);
    CHECK_THROWS_AS(fixed_k_distance(base, shifted, 30, 1000), GuardError);
    CHECK_THROWS_AS(finite_trace_distance(base, shifted, 0.05), GuardError);
}

TEST_CASE("finite_trace_distance") {
    auto base = fig1(0.0), shifted = fig1(0.1);

    // identical chains with one positive word per length keep the deep
    // sweep enumerable
    auto same = finite_trace_distance(lemma3_right(), lemma3_right(), 0.5);
    CHECK(same.value == 0.0);
    CHECK(same.error_bound == 0.5);

    // shallow horizon keeps the sweep enumerable; the k=2 contrast is the max
    auto d = finite_trace_distance(base, shifted, 0.93);
    CHECK(d.value >= 0.11 - 1e-12);
    CHECK(d.value <= 1.0);
    CHECK(d.argmax_word == word_of("bb"));

    // differences unreachable from the initial support do not register
    auto reachable = parse_chain(R"({"states": ["x", "y"], "labels": {"x": "a", "y": "b"},
      "initial": {"x": 1.0}, "transitions": {"x": {"x": 1.0}, "y": {"y": 1.0}}})");
    auto reachable2 = parse_chain(R"({"states": ["x", "y"], "labels": {"x": "a", "y": "b"},
      "initial": {"x": 1.0}, "transitions": {"x": {"x": 1.0}, "y": {"x": 0.5, "y": 0.5}}})");
    CHECK(finite_trace_distance(reachable, reachable2, 0.5).value == 0.0);
}

TEST_CASE("finite_trace_distance on deterministic cycles") {
    auto d = finite_trace_distance(cycle_ab(), cycle_aa(), 0.05);
    CHECK(d.value == doctest::Approx(1.0));
}

TEST_CASE("distance sweep stabilizes past the thm7 horizon") {
    auto check_pair = [](const MarkovChain& a, const MarkovChain& b, double epsilon) {
        const int n = std::max(a.n(), b.n());
        const auto horizon = compute_horizon(n, shared_pmin(a, b), epsilon, HorizonMode::thm7);
        auto sweep = distance_sweep(a, b, horizon.k + 20, 10'000'000);
        double max_at_k = 0.0, max_beyond = 0.0;
        for (long long i = 0; i < horizon.k; ++i) max_at_k = std::max(max_at_k, sweep[i].value);
        for (const auto& d : sweep) max_beyond = std::max(max_beyond, d.value);
        CHECK(max_beyond <= max_at_k + epsilon);
        return max_at_k;
    };

    // D^i = 1 - 0.5^(i-1) grows toward a sup that is never attained: the
    // all-a chain against a leaky a-emitter
    auto leaky = parse_chain(R"({"states": ["s", "t"], "labels": {"s": "a", "t": "b"},
      "initial": {"s": 1.0}, "transitions": {"s": {"s": 0.5, "t": 0.5}, "t": {"t": 1.0}},
      "pmin": 0.5})");
    double observed = check_pair(lemma3_right(), leaky, 0.1);
    CHECK(observed > 0.9);  // the sweep must have chased the growing contrasts

    // a probabilistic split into two deterministic one-state cycles keeps
    // the support at two words per length while the horizon is deep
    auto two_cycles = [](const char* split) {
        return parse_chain(std::string(R"({"states": ["r", "c", "d"],
          "labels": {"r": "a", "c": "b", "d": "c"},
          "initial": {"r": 1.0},
          "transitions": {
            "r": )") + split + R"(,
            "c": {"c": 1.0}, "d": {"d": 1.0}
          }, "pmin": 0.45})");
    };
    auto a = two_cycles(R"({"c": 0.45, "d": 0.55})");
    auto b = two_cycles(R"({"c": 0.55, "d": 0.45})");
    check_pair(a, b, 0.1);
}

TEST_CASE("infinite_trace_distance_approx") {
    // pmin 0.5 keeps the horizon at K = 14, within the enumeration guard
    auto same = infinite_trace_distance_approx(fig1(0.0), fig1(0.0), 0.9);
    CHECK(same.value == 0.0);

    auto cycles = infinite_trace_distance_approx(cycle_ab(), cycle_aa(), 0.25);
    // pmin 0.9: K = 12 + 2, certified error 2 * (1 - 0.9^4)^floor(10/4)
    CHECK(cycles.value == doctest::Approx(1.0));
    double decay = 1.0 - std::pow(0.9, 4.0);
    CHECK(cycles.error_bound == doctest::Approx(2.0 * std::pow(decay, 2.0)).epsilon(1e-12));
    CHECK(cycles.value >= 1.0 - cycles.error_bound);

    // non-pathological branching pair: every long word is light, so the
    // reported value sits inside the certified bound
    Xoshiro256ss rng(37, 0, 0);
    RandomChainSpec spec;
    spec.min_states = 2;
    spec.max_states = 2;
    spec.max_alphabet = 2;
    spec.denominator = 2;
    spec.det_cycle_prob = 0.0;
    auto draw = [&] {
        while (true) {
            auto c = random_chain(rng, spec);
            if (!chain_is_pathological(c)) return c;
        }
    };
    auto ra = draw(), rb = draw();
    auto d = infinite_trace_distance_approx(ra, rb, 0.92);
    CHECK(d.value >= 0.0);
    CHECK(d.value <= d.error_bound);
}

TEST_CASE("tv lower bound demo") {
    auto approx100 = tv_lower_bound_demo(0.1, 100, false);
    CHECK(approx100.p1 == doctest::Approx(0.8413447461).epsilon(1e-9));
    CHECK(approx100.p2 == doctest::Approx(0.1537170830).epsilon(1e-8));
    CHECK(approx100.gap == doctest::Approx(0.688).epsilon(1e-3));

    auto exact400 = tv_lower_bound_demo(0.1, 400, true);
    CHECK(exact400.c_n == 220);
    CHECK(exact400.gap == doctest::Approx(0.956117821943).epsilon(1e-9));

    auto exact1 = tv_lower_bound_demo(0.1, 1, true);
    CHECK(exact1.c_n == 0);
    CHECK(exact1.gap == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(exact1.gap < 0.2);

    CHECK_THROWS_AS(tv_lower_bound_demo(0.5, 100, true), DomainError);
    CHECK_THROWS_AS(tv_lower_bound_demo(0.1, 0, true), DomainError);
}

TEST_CASE("tv demo: exact and normal approximations agree for large n") {
    for (double tau : {0.05, 0.1, 0.2}) {
        for (long long n : {100LL, 400LL, 1000LL}) {
            auto exact = tv_lower_bound_demo(tau, n, true);
            auto approx = tv_lower_bound_demo(tau, n, false);
            CHECK(std::fabs(exact.gap - approx.gap) <= 0.05);
        }
    }
}

TEST_CASE("tv demo gap grows with the horizon") {
    double prev = -1.0;
    for (long long n : {25LL, 100LL, 400LL}) {
        auto point = tv_lower_bound_demo(0.1, n, true);
        CHECK(point.gap > prev);
        prev = point.gap;
    }
}

TEST_CASE("decide_trace_equivalence") {
    auto base = fig1(0.0);
    CHECK(decide_trace_equivalence(base, base));
    CHECK(decide_trace_equivalence(base, fig1_unfold()));
    CHECK(decide_trace_equivalence(fig1_unfold(), base));
    CHECK_FALSE(decide_trace_equivalence(base, fig1(0.1)));
    CHECK_FALSE(decide_trace_equivalence(cycle_ab(), cycle_aa()));
}

TEST_CASE("trace equivalence is symmetric on random pairs") {
    Xoshiro256ss rng(41, 0, 0);
    RandomChainSpec spec;
    spec.max_states = 3;
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_chain(rng, spec), b = random_chain(rng, spec);
        CHECK(decide_trace_equivalence(a, b) == decide_trace_equivalence(b, a));
    }
}
