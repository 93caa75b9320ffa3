#include "lmc/sampler.hpp"

#include <algorithm>

#include "lmc/errors.hpp"

namespace lmc {

Word SampleBatch::trace_word(std::uint64_t i) const {
    Word w;
    w.reserve(static_cast<size_t>(length));
    for (std::uint8_t id : trace(i)) w.push_back(alphabet[id]);
    return w;
}

namespace {

int draw_index(Xoshiro256ss& rng, std::span<const double> weights) {
    double u = rng.uniform01();
    double acc = 0.0;
    int last_positive = -1;
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        last_positive = static_cast<int>(i);
        acc += weights[i];
        if (u < acc) return last_positive;
    }
    // rounding tail: fall back to the last positive entry
    return last_positive;
}

}  // namespace

SampleBatch sample(const MarkovChain& chain, long long length, std::uint64_t count,
                   std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t batch_index,
                   bool observe_states) {
    if (length < 1) throw DomainError("sample: length must be at least 1");
    if (chain.alphabet.size() > 255) throw DomainError("sample: alphabet too large");

    SampleBatch batch;
    batch.length = length;
    batch.count = count;
    batch.alphabet = chain.alphabet;
    batch.lineage = {master_seed, stream_id, batch_index, 1};
    batch.traces.resize(count * static_cast<std::uint64_t>(length));
    if (observe_states) batch.state_paths.resize(count * static_cast<std::uint64_t>(length));

    Xoshiro256ss rng(master_seed, stream_id, batch_index);
    std::uint64_t pos = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        int s = draw_index(rng, chain.initial);
        for (long long step = 0; step < length; ++step, ++pos) {
            if (step > 0) s = draw_index(rng, chain.row(s));
            batch.traces[pos] = static_cast<std::uint8_t>(chain.label_of(s));
            if (observe_states) batch.state_paths[pos] = s;
        }
    }
    return batch;
}

namespace {

Word word_of(const SampleBatch& batch, std::uint64_t i) { return batch.trace_word(i); }

size_t union_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    size_t extra = 0;
    for (const auto& sym : b)
        if (std::find(a.begin(), a.end(), sym) == a.end()) ++extra;
    return a.size() + extra;
}

}  // namespace

TraceCounts count_traces(const SampleBatch& batch1, const SampleBatch& batch2) {
    if (batch1.length != batch2.length)
        throw DomainError("count_traces: batches have different trace lengths");
    TraceCounts counts;
    counts.length = batch1.length;
    counts.total1 = batch1.count;
    counts.total2 = batch2.count;
    counts.alphabet_size = union_size(batch1.alphabet, batch2.alphabet);
    for (std::uint64_t i = 0; i < batch1.count; ++i) counts.cells[word_of(batch1, i)].first += 1;
    for (std::uint64_t i = 0; i < batch2.count; ++i) counts.cells[word_of(batch2, i)].second += 1;
    return counts;
}

void merge_into(TraceCounts& into, const TraceCounts& from) {
    if (into.length == 0 && into.cells.empty() && into.total1 == 0 && into.total2 == 0) {
        into = from;
        return;
    }
    if (into.length != from.length)
        throw DomainError("merge_counts: lengths differ");
    into.total1 += from.total1;
    into.total2 += from.total2;
    into.alphabet_size = std::max(into.alphabet_size, from.alphabet_size);
    for (const auto& [word, pair] : from.cells) {
        auto& cell = into.cells[word];
        cell.first += pair.first;
        cell.second += pair.second;
    }
}

TraceCounts merge_counts(const TraceCounts& a, const TraceCounts& b) {
    TraceCounts out = a;
    merge_into(out, b);
    return out;
}

TraceCounts prefix_counts(const TraceCounts& counts, long long i) {
    if (i < 1 || i > counts.length) throw DomainError("prefix_counts: length out of range");
    TraceCounts out;
    out.length = i;
    out.total1 = counts.total1;
    out.total2 = counts.total2;
    out.alphabet_size = counts.alphabet_size;
    for (const auto& [word, pair] : counts.cells) {
        Word prefix(word.begin(), word.begin() + static_cast<long>(i));
        auto& cell = out.cells[prefix];
        cell.first += pair.first;
        cell.second += pair.second;
    }
    return out;
}

}  // namespace lmc
