#include <cmath>
#include <map>

#include "doctest.h"
#include "lmc/builtin.hpp"
#include "lmc/errors.hpp"
#include "lmc/sampler.hpp"
#include "lmc/stats.hpp"
#include "support.hpp"

using namespace lmc;
using testsupport::word_of;

TEST_CASE("sampling is reproducible from (seed, stream, batch)") {
    auto chain = fig1(0.1);
    auto b1 = sample(chain, 12, 200, 99, 7, 3);
    auto b2 = sample(chain, 12, 200, 99, 7, 3);
    CHECK(b1.traces == b2.traces);

    auto other_stream = sample(chain, 12, 200, 99, 8, 3);
    CHECK(b1.traces != other_stream.traces);
    auto other_batch = sample(chain, 12, 200, 99, 7, 4);
    CHECK(b1.traces != other_batch.traces);
    auto other_seed = sample(chain, 12, 200, 100, 7, 3);
    CHECK(b1.traces != other_seed.traces);
}

TEST_CASE("single-state chain emits a constant trace") {
    auto single = parse_chain(R"({"states": ["x"], "labels": {"x": "a"},
      "initial": {"x": 1.0}, "transitions": {"x": {"x": 1.0}}})");
    auto batch = sample(single, 8, 20, 1, 0, 0);
    for (std::uint64_t i = 0; i < batch.count; ++i) CHECK(batch.trace_word(i) == word_of("aaaaaaaa"));
}

TEST_CASE("empirical frequencies match the exact word probabilities") {
    // binomial 3-4 sigma bands at 1e5 draws
    auto coin = fig1(0.0);
    auto batch = sample(coin, 1, 100'000, 4242, 0, 0);
    std::uint64_t a_count = 0;
    for (std::uint64_t i = 0; i < batch.count; ++i)
        if (batch.trace_word(i) == word_of("a")) ++a_count;
    CHECK(std::fabs(a_count / 1e5 - 0.5) <= 0.01);

    auto ladder = fig3(0.3);
    auto long_batch = sample(ladder, 4, 100'000, 4242, 1, 0);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < long_batch.count; ++i)
        if (long_batch.trace_word(i) == word_of("aaab")) ++hits;
    CHECK(std::fabs(hits / 1e5 - 0.027) <= 0.003);
}

TEST_CASE("state-observable mode emits valid paths with matching labels") {
    auto chain = fig2();
    auto batch = sample(chain, 10, 50, 5, 0, 0, true);
    REQUIRE(batch.state_paths.size() == batch.traces.size());
    for (std::uint64_t i = 0; i < batch.count; ++i) {
        auto path = batch.state_path(i);
        CHECK(is_valid_path(chain, Path(path.begin(), path.end())));
        auto trace = batch.trace(i);
        for (size_t j = 0; j < trace.size(); ++j)
            CHECK(chain.label_of(path[j]) == static_cast<int>(trace[j]));
    }
    auto label_only = sample(chain, 10, 50, 5, 0, 0, false);
    CHECK(label_only.state_paths.empty());
}

TEST_CASE("count_traces tallies both batches") {
    auto chain = fig1(0.0);
    auto empty1 = sample(chain, 2, 0, 1, 0, 0);
    auto empty2 = sample(chain, 2, 0, 1, 1, 0);
    auto none = count_traces(empty1, empty2);
    CHECK(none.cells.empty());
    CHECK(none.total1 == 0);

    // hand-built batches {aa, aa, ab} vs {ab}
    SampleBatch b1, b2;
    b1.length = b2.length = 2;
    b1.alphabet = b2.alphabet = chain.alphabet;
    b1.count = 3;
    b1.traces = {0, 0, 0, 0, 0, 1};
    b2.count = 1;
    b2.traces = {0, 1};
    auto counts = count_traces(b1, b2);
    CHECK(counts.total1 == 3);
    CHECK(counts.total2 == 1);
    CHECK(counts.cells.at(word_of("aa")) == std::pair<std::uint64_t, std::uint64_t>{2, 0});
    CHECK(counts.cells.at(word_of("ab")) == std::pair<std::uint64_t, std::uint64_t>{1, 1});

    auto mismatched = sample(chain, 3, 1, 1, 0, 0);
    CHECK_THROWS_AS(count_traces(b1, mismatched), DomainError);
}

TEST_CASE("merging counts equals counting merged batches") {
    auto chain = fig1(0.1);
    for (int trial = 0; trial < 5; ++trial) {
        auto a1 = sample(chain, 3, 40, 7, 0, trial);
        auto b1 = sample(chain, 3, 30, 7, 1, trial);
        auto a2 = sample(chain, 3, 25, 7, 2, trial);
        auto b2 = sample(chain, 3, 35, 7, 3, trial);

        auto merged = merge_counts(count_traces(a1, b1), count_traces(a2, b2));
        // direct: concatenate the raw traces
        SampleBatch all_a = a1, all_b = b1;
        all_a.traces.insert(all_a.traces.end(), a2.traces.begin(), a2.traces.end());
        all_a.count += a2.count;
        all_b.traces.insert(all_b.traces.end(), b2.traces.begin(), b2.traces.end());
        all_b.count += b2.count;
        auto direct = count_traces(all_a, all_b);

        CHECK(merged.cells == direct.cells);
        CHECK(merged.total1 == direct.total1);
        CHECK(merged.total2 == direct.total2);

        // commutativity
        auto flipped = merge_counts(count_traces(a2, b2), count_traces(a1, b1));
        CHECK(flipped.cells == merged.cells);

        // associativity
        auto c3 = count_traces(sample(chain, 3, 15, 7, 4, trial), sample(chain, 3, 20, 7, 5, trial));
        auto left = merge_counts(merge_counts(count_traces(a1, b1), count_traces(a2, b2)), c3);
        auto right = merge_counts(count_traces(a1, b1), merge_counts(count_traces(a2, b2), c3));
        CHECK(left.cells == right.cells);
        CHECK(left.total1 == right.total1);
        CHECK(left.total2 == right.total2);
    }
}

TEST_CASE("prefix_counts") {
    auto chain = fig1(0.0);
    SampleBatch b1, b2;
    b1.length = b2.length = 2;
    b1.alphabet = b2.alphabet = chain.alphabet;
    b1.count = 3;
    b1.traces = {0, 0, 0, 0, 0, 1};
    b2.count = 0;
    auto counts = count_traces(b1, b2);

    auto identity = prefix_counts(counts, 2);
    CHECK(identity.cells == counts.cells);

    auto ones = prefix_counts(counts, 1);
    CHECK(ones.cells.at(word_of("a")) == std::pair<std::uint64_t, std::uint64_t>{3, 0});
    CHECK(ones.total1 == 3);

    CHECK_THROWS_AS(prefix_counts(counts, 0), DomainError);
    CHECK_THROWS_AS(prefix_counts(counts, 3), DomainError);

    // totals preserved for every i on sampled batches
    auto big = count_traces(sample(chain, 6, 500, 11, 0, 0), sample(chain, 6, 400, 11, 1, 0));
    for (long long i = 1; i <= 6; ++i) {
        auto p = prefix_counts(big, i);
        std::uint64_t sum1 = 0, sum2 = 0;
        for (const auto& [w, cell] : p.cells) {
            sum1 += cell.first;
            sum2 += cell.second;
        }
        CHECK(sum1 == 500);
        CHECK(sum2 == 400);
    }
}

TEST_CASE("distinct streams pass a chi-square independence smoke test") {
    // non-blocking diagnostic: paired label draws from two streams
    auto chain = fig1(0.0);
    auto s1 = sample(chain, 1, 20'000, 77, 0, 0);
    auto s2 = sample(chain, 1, 20'000, 77, 1, 0);
    double counts[2][2] = {{0, 0}, {0, 0}};
    for (std::uint64_t i = 0; i < s1.count; ++i) counts[s1.traces[i]][s2.traces[i]] += 1.0;
    double total = 20'000.0;
    double chi2 = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double row = counts[x][0] + counts[x][1];
            double col = counts[0][y] + counts[1][y];
            double expect = row * col / total;
            chi2 += (counts[x][y] - expect) * (counts[x][y] - expect) / expect;
        }
    WARN_LE(chi2, chi_square_quantile(1.0 - 1e-4, 1));
}

TEST_CASE("sampler handle advances its batch counter") {
    Sampler sampler(fig1(0.1), 123, 9);
    auto b0 = sampler.next_batch(4, 10);
    auto b1 = sampler.next_batch(4, 10);
    CHECK(b0.lineage.first_batch == 0);
    CHECK(b1.lineage.first_batch == 1);
    CHECK(b0.traces != b1.traces);
    CHECK(sampler.batches_drawn() == 2);
    CHECK(sampler.lineage().batch_count == 2);

    // the same handle configuration replays the same stream
    Sampler replay(fig1(0.1), 123, 9);
    CHECK(replay.next_batch(4, 10).traces == b0.traces);
}
