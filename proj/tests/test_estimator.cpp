#include <cmath>

#include "doctest.h"
#include "lmc/builtin.hpp"
#include "lmc/errors.hpp"
#include "lmc/estimator.hpp"
#include "lmc/oracle.hpp"
#include "support.hpp"

using namespace lmc;
using testsupport::word_of;

namespace {

TraceCounts two_cell_counts(std::uint64_t a1, std::uint64_t b1, std::uint64_t a2,
                            std::uint64_t b2) {
    TraceCounts counts;
    counts.length = 1;
    counts.alphabet_size = 2;
    counts.total1 = a1 + b1;
    counts.total2 = a2 + b2;
    counts.cells[word_of("a")] = {a1, a2};
    counts.cells[word_of("b")] = {b1, b2};
    return counts;
}

}  // namespace

TEST_CASE("goodman_intervals on the worked two-cell example") {
    auto counts = two_cell_counts(60, 40, 40, 60);
    auto result = goodman_intervals(counts, 0.05);

    CHECK(result.params.degrees_of_freedom == doctest::Approx(2.0));
    CHECK(result.params.m == doctest::Approx(2.447747).epsilon(1e-6));

    REQUIRE(result.contrasts.size() == 3);  // two observed cells + pooled unseen
    for (size_t i = 0; i < 2; ++i) {
        CHECK(result.contrasts[i].delta == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(result.contrasts[i].s == doctest::Approx(0.069282032303).epsilon(1e-9));
        CHECK(result.contrasts[i].s * result.params.m ==
              doctest::Approx(0.169584875).epsilon(1e-6));
    }
    // the pooled unseen cell has an exactly-zero half-width
    CHECK(result.contrasts.back().word.empty());
    CHECK(result.contrasts.back().s == 0.0);
}

TEST_CASE("goodman_intervals degenerate cells") {
    // equal samples: all contrasts zero, half-widths nonnegative
    auto equal = two_cell_counts(50, 50, 50, 50);
    for (const auto& c : goodman_intervals(equal, 0.1).contrasts) {
        CHECK(c.delta == 0.0);
        CHECK(c.s >= 0.0);
    }

    // empirical probabilities at the endpoints contribute zero variance
    auto endpoint = two_cell_counts(100, 0, 100, 0);
    for (const auto& c : goodman_intervals(endpoint, 0.1).contrasts) CHECK(c.s == 0.0);

    TraceCounts empty;
    empty.length = 1;
    empty.alphabet_size = 2;
    CHECK_THROWS_AS(goodman_intervals(empty, 0.1), DomainError);
}

TEST_CASE("sorted-pool statistics match the counted route") {
    // the unbounded driver reads per-length contrasts off a sorted pool;
    // they must agree with goodman_intervals over prefix_counts exactly
    auto b1 = sample(fig1(0.0), 5, 400, 321, 0, 0);
    auto b2 = sample(fig1(0.1), 5, 300, 321, 1, 0);
    auto pooled = pooled_length_stats(b1, b2);
    auto counts = count_traces(b1, b2);
    REQUIRE(pooled.size() == 5);
    for (long long i = 1; i <= 5; ++i) {
        auto per_length = goodman_intervals(prefix_counts(counts, i), 0.05);
        double max_delta = 0.0, max_s = 0.0;
        for (const auto& c : per_length.contrasts) {
            max_delta = std::max(max_delta, c.delta);
            max_s = std::max(max_s, c.s);
        }
        CHECK(pooled[static_cast<size_t>(i) - 1].max_delta ==
              doctest::Approx(max_delta).epsilon(1e-15));
        CHECK(pooled[static_cast<size_t>(i) - 1].max_s == doctest::Approx(max_s).epsilon(1e-15));
    }
}

TEST_CASE("estimate_fixed_k on identical chains brackets zero") {
    auto chain = fig1(0.0);
    Sampler s1(chain, 21, 0), s2(chain, 21, 1);
    auto report = estimate_fixed_k(s1, s2, 1, 0.05, 0.05);
    CHECK(report.conforming);
    CHECK(report.lo == 0.0);
    CHECK(report.point <= 0.02);
    CHECK(report.hi - report.lo <= 0.1 + 1e-12);
    CHECK(report.samples1 == report.samples2);
    CHECK(report.k == 1);
}

TEST_CASE("estimate_fixed_k with a vacuous target stops after one batch") {
    auto chain = fig1(0.1);
    Sampler s1(chain, 22, 0), s2(chain, 22, 1);
    auto report = estimate_fixed_k(s1, s2, 2, 0.05, 1.5);
    CHECK(report.conforming);
    CHECK(report.samples1 == 10'000);
    CHECK(report.lo == 0.0);
    CHECK(report.hi == 1.0);
}

TEST_CASE("estimate_fixed_k covers the exact two-state distance") {
    auto base = fig1(0.0), shifted = fig1(0.1);
    const double oracle = fixed_k_distance(base, shifted, 2).value;

    for (auto method : {CiMethod::goodman, CiMethod::bonferroni_hoeffding}) {
        EstimatorOptions options;
        options.ci = method;
        Sampler s1(base, 31, 0), s2(shifted, 31, 1);
        auto report = estimate_fixed_k(s1, s2, 2, 0.05, 0.02, options);
        CHECK(report.conforming);
        CHECK(report.lo <= oracle);
        CHECK(oracle <= report.hi);
        CHECK(report.hi - report.lo <= 0.04 + 1e-12);
    }
}

TEST_CASE("estimate_fixed_k keeps sampling until the rule fires") {
    auto base = fig1(0.0), shifted = fig1(0.1);
    Sampler s1(base, 33, 0), s2(shifted, 33, 1);
    auto report = estimate_fixed_k(s1, s2, 1, 0.05, 0.005);
    CHECK(report.conforming);
    CHECK(report.samples1 >= 20'000);  // one batch cannot satisfy 0.005
    CHECK(std::fabs(report.point - 0.1) <= 0.01);
}

TEST_CASE("estimate_fixed_k reports a capped run as non-conforming") {
    auto base = fig1(0.0), shifted = fig1(0.1);
    EstimatorOptions options;
    options.batch_size = 1000;
    options.sample_cap = 4000;
    Sampler s1(base, 34, 0), s2(shifted, 34, 1);
    auto report = estimate_fixed_k(s1, s2, 2, 0.05, 0.001, options);
    CHECK_FALSE(report.conforming);
    CHECK(report.note.find("cap") != std::string::npos);
    CHECK(report.samples1 + report.samples2 <= 4000);
}

TEST_CASE("bonferroni-hoeffding widths stay within 3x of goodman (diagnostic)") {
    auto counts = two_cell_counts(2500, 7500, 3600, 6400);
    auto goodman = goodman_intervals(counts, 0.05);
    double goodman_worst = 0.0;
    for (const auto& c : goodman.contrasts)
        goodman_worst = std::max(goodman_worst, c.s * goodman.params.m);
    double hoeff = 2.0 * std::sqrt(std::log(4.0 * 2.0 / 0.05) / (2.0 * 10'000.0));
    WARN_LE(hoeff, 3.0 * goodman_worst);
}

TEST_CASE("estimate_unbounded on the all-a chain is conforming around zero") {
    auto chain = lemma3_right();
    Sampler s1(chain, 41, 0), s2(chain, 41, 1);
    auto report = estimate_unbounded(s1, s2, 0.4, 2, 0.1, 0.2);
    CHECK(report.conforming);
    CHECK(report.lo == 0.0);
    CHECK(report.point == 0.0);
    CHECK(report.hi - report.lo <= 0.2 + 1e-12);
    CHECK(report.k == 360);  // thm7 at (n=2, pmin=0.4, eps=0.1)
    CHECK(report.samples1 == 10'000);
}

TEST_CASE("estimate_unbounded separates two single-state chains") {
    auto only_a = make_chain({"x"}, {"a"}, {1.0}, {1.0}, 0.5);
    auto only_b = make_chain({"x"}, {"b"}, {1.0}, {1.0}, 0.5);
    Sampler s1(only_a, 42, 0), s2(only_b, 42, 1);
    auto report = estimate_unbounded(s1, s2, 0.5, 1, 0.1, 0.2);
    CHECK(report.conforming);
    CHECK(report.k == 6);  // n=1 horizon: ceil(log .1 / log .5) + 2
    CHECK(report.point == doctest::Approx(1.0));
    CHECK(report.lo <= 1.0);
    CHECK(report.hi == doctest::Approx(1.0));
}

TEST_CASE("estimate_unbounded width never exceeds delta on conforming runs") {
    auto base = fig1(0.0), shifted = fig1(0.1);
    EstimatorOptions options;
    options.ci = CiMethod::bonferroni_hoeffding;
    Sampler s1(base, 43, 0), s2(shifted, 43, 1);
    auto report = estimate_unbounded(s1, s2, 0.4, 2, 0.05, 0.3, options);
    CHECK(report.conforming);
    CHECK(report.hi - report.lo <= 0.3 + 1e-12);
    // the point estimate tracks the true finite-trace distance (0.11)
    CHECK(report.point >= 0.11 - 0.3 / 4 - 0.02);
    CHECK(report.hi >= 0.11 - 0.3);
}

TEST_CASE("estimate_unbounded refuses an absurd horizon") {
    auto chain = fig1(0.1);
    EstimatorOptions options;
    options.max_horizon = 100;
    Sampler s1(chain, 44, 0), s2(chain, 44, 1);
    auto report = estimate_unbounded(s1, s2, 0.4, 2, 0.1, 0.2, options);
    CHECK_FALSE(report.conforming);
    CHECK(report.note.find("infeasible") != std::string::npos);
    CHECK(report.samples1 == 0);
}

TEST_CASE("estimate_infinite on identical deterministic-trace chains") {
    auto chain = lemma3_right();
    Sampler s1(chain, 51, 0), s2(chain, 51, 1);
    auto report = estimate_infinite(s1, s2, 0.4, 2, 0.05, 0.2);
    CHECK(report.conforming);
    CHECK(report.lo == 0.0);
    CHECK(report.point == 0.0);
    CHECK(report.hi - report.lo <= 0.2 + 1e-12);
}

TEST_CASE("estimate_infinite separates the two deterministic cycles") {
    Sampler s1(cycle_ab(), 52, 0), s2(cycle_aa(), 52, 1);
    auto report = estimate_infinite(s1, s2, 0.9, 2, 0.05, 0.2);
    CHECK(report.conforming);
    CHECK(report.point == doctest::Approx(1.0));
    CHECK(report.lo <= 1.0);
    CHECK(report.hi == doctest::Approx(1.0));
    CHECK(report.hi - report.lo <= 0.2 + 1e-12);
}

TEST_CASE("estimate_infinite retries with a longer horizon when the width misses") {
    // an even initial split over the ab-cycle against the pure cycle puts
    // the distance at 0.5, so no clipping hides the structural slack
    auto split = make_chain({"s", "t"}, {"a", "b"}, {0.0, 1.0, 1.0, 0.0}, {0.5, 0.5});
    EstimatorOptions options;
    options.ci = CiMethod::bonferroni_hoeffding;

    {
        // true transition probabilities are 1.0, so claiming p_min = 0.9 is
        // sound and keeps the horizon short enough for the retry to land
        Sampler s1(split, 91, 0), s2(cycle_ab(), 91, 1);
        auto report = estimate_infinite(s1, s2, 0.9, 2, 0.05, 0.2, options);
        CHECK(report.conforming);
        CHECK(report.note.find("retried") != std::string::npos);
        CHECK(report.k == 22);  // 16 + 2, then + n^2
        CHECK(std::fabs(report.point - 0.5) <= 0.03);
        CHECK(report.lo <= 0.5);
        CHECK(0.5 <= report.hi);
    }
    {
        // with the weaker p_min claim the slack survives the single retry
        // and the report stays flagged non-conforming
        Sampler s1(split, 92, 0), s2(cycle_ab(), 92, 1);
        auto report = estimate_infinite(s1, s2, 0.5, 2, 0.05, 0.2, options);
        CHECK_FALSE(report.conforming);
        CHECK(report.note.find("retried") != std::string::npos);
        CHECK(report.hi - report.lo > 0.2);
        CHECK(report.lo <= 0.5);
        CHECK(0.5 <= report.hi);
    }
}

TEST_CASE("learning reports never-visited states as unresolved") {
    auto island = parse_chain(R"({"states": ["s", "t", "d"],
      "labels": {"s": "a", "t": "b", "d": "a"}, "initial": {"s": 0.5, "t": 0.5},
      "transitions": {"s": {"s": 0.5, "t": 0.5}, "t": {"s": 0.5, "t": 0.5}, "d": {"d": 1.0}}})");
    Sampler sampler(island, 65, 0, true);
    auto learned = learn_chain_finite_precision(sampler, 0.1, 0.05);
    CHECK(learned.partial);
    CHECK(learned.unresolved == std::vector<std::string>{"d"});
    CHECK(learned.confidence == 0.0);

    // the failure propagates out of the equivalence decision
    Sampler s1(island, 66, 0, true), s2(island, 66, 1, true);
    CHECK_THROWS_AS(decide_equivalence_black_box(s1, s2, 0.1, 0.05), Error);
}

TEST_CASE("learn_chain_finite_precision recovers the coin chain on the grid") {
    auto chain = fig1(0.0);  // rows (0.5, 0.5), initial (0.5, 0.5)
    Sampler sampler(chain, 61, 0, true);
    auto learned = learn_chain_finite_precision(sampler, 0.01, 0.05);
    CHECK_FALSE(learned.partial);
    CHECK(learned.grid_consistent);
    CHECK(learned.confidence == doctest::Approx(0.95));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(learned.chain.p(i, j) == 0.5);
    CHECK(learned.chain.initial == std::vector<double>{0.5, 0.5});
}

TEST_CASE("learn_chain_finite_precision on a deterministic cycle") {
    Sampler sampler(cycle_ab(), 62, 0, true);
    auto learned = learn_chain_finite_precision(sampler, 0.25, 0.05);
    CHECK_FALSE(learned.partial);
    CHECK(learned.grid_consistent);
    CHECK(learned.chain.p(0, 1) == 1.0);
    CHECK(learned.chain.p(1, 0) == 1.0);
}

TEST_CASE("off-grid rows are flagged grid-inconsistent but stay stochastic") {
    // every scaled entry sits 0.75 above its floor on grid 0.25, so plain
    // rounding pushes each row to 5/4 total and the flag must trip
    auto chain = parse_chain(R"({"states": ["w", "x", "y", "z"],
      "labels": {"w": "a", "x": "b", "y": "c", "z": "d"},
      "initial": {"w": 0.1875, "x": 0.1875, "y": 0.1875, "z": 0.4375},
      "transitions": {
        "w": {"w": 0.1875, "x": 0.1875, "y": 0.1875, "z": 0.4375},
        "x": {"w": 0.1875, "x": 0.1875, "y": 0.1875, "z": 0.4375},
        "y": {"w": 0.1875, "x": 0.1875, "y": 0.1875, "z": 0.4375},
        "z": {"w": 0.1875, "x": 0.1875, "y": 0.1875, "z": 0.4375}
      }})");
    Sampler sampler(chain, 63, 0, true);
    auto learned = learn_chain_finite_precision(sampler, 0.25, 0.001);
    CHECK_FALSE(learned.grid_consistent);
    for (int i = 0; i < 4; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) {
            sum += learned.chain.p(i, j);
            CHECK(learned.chain.p(i, j) >= 0.0);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("learning requires a state-observable sampler") {
    Sampler label_only(fig1(0.0), 64, 0, false);
    CHECK_THROWS_AS(learn_chain_finite_precision(label_only, 0.1, 0.05), DomainError);
    Sampler observed(fig1(0.0), 64, 0, true);
    CHECK_THROWS_AS(learn_chain_finite_precision(observed, 0.3, 0.05), DomainError);  // not 1/m
}

TEST_CASE("decide_equivalence_black_box") {
    auto base = fig1(0.0);

    {
        Sampler s1(base, 71, 0, true), s2(fig1(0.1), 71, 1, true);
        auto decision = decide_equivalence_black_box(s1, s2, 0.1, 0.05);
        CHECK_FALSE(decision.equivalent);
        CHECK(decision.confidence == doctest::Approx(0.95));
        CHECK(decision.report.state_observation_used);
        CHECK(decision.report.point >= 0.1 - 1e-9);
    }
    {
        Sampler s1(base, 72, 0, true), s2(fig1_unfold(), 72, 1, true);
        auto decision = decide_equivalence_black_box(s1, s2, 0.1, 0.05);
        CHECK(decision.equivalent);
        CHECK(decision.report.point <= 1e-9);
    }
    {
        // a shift below g/2 is erased by rounding: the documented failure mode
        Sampler s1(base, 73, 0, true), s2(fig1(0.01), 73, 1, true);
        auto decision = decide_equivalence_black_box(s1, s2, 0.1, 0.01);
        CHECK(decision.equivalent);
    }
}

TEST_CASE("distance report JSON round trip") {
    auto chain = fig1(0.0);
    Sampler s1(chain, 81, 0), s2(chain, 81, 1);
    auto report = estimate_fixed_k(s1, s2, 2, 0.05, 0.1);
    auto text = report_to_json(report);
    auto parsed = report_from_json(text);
    CHECK(report_to_json(parsed) == text);
    CHECK(parsed.point == report.point);
    CHECK(parsed.lineage1.stream_id == 0);
    CHECK(parsed.lineage2.stream_id == 1);
    CHECK_THROWS_AS(report_from_json("{}"), ParseError);
    CHECK_THROWS_AS(report_from_json("nope"), ParseError);
}
