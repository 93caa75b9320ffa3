#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lmc/chain.hpp"
#include "lmc/rng.hpp"

namespace lmc {

struct SeedLineage {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t first_batch = 0;
    std::uint64_t batch_count = 0;
};

// A batch of independent run prefixes of equal length.  Traces are stored
// flat as alphabet indices; state paths are filled only in state-observable
// mode.
struct SampleBatch {
    long long length = 0;
    std::uint64_t count = 0;
    std::vector<std::string> alphabet;
    std::vector<std::uint8_t> traces;      // count x length
    std::vector<std::int32_t> state_paths; // count x length, may be empty
    SeedLineage lineage;

    std::span<const std::uint8_t> trace(std::uint64_t i) const {
        return {traces.data() + i * static_cast<std::uint64_t>(length),
                static_cast<size_t>(length)};
    }
    std::span<const std::int32_t> state_path(std::uint64_t i) const {
        return {state_paths.data() + i * static_cast<std::uint64_t>(length),
                static_cast<size_t>(length)};
    }
    Word trace_word(std::uint64_t i) const;
};

// Draws `count` independent prefixes of `length` symbols.  Reproducible as
// a pure function of (master seed, stream id, batch index).
SampleBatch sample(const MarkovChain& chain, long long length, std::uint64_t count,
                   std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t batch_index,
                   bool observe_states = false);

// Black-box simulation handle: a chain plus a seeded stream with a batch
// counter.  Label-only unless observe_states is requested.
class Sampler {
  public:
    Sampler(MarkovChain chain, std::uint64_t master_seed, std::uint64_t stream_id,
            bool observe_states = false)
        : chain_(std::move(chain)),
          master_seed_(master_seed),
          stream_id_(stream_id),
          observe_states_(observe_states) {}

    SampleBatch next_batch(long long length, std::uint64_t count) {
        return sample(chain_, length, count, master_seed_, stream_id_, next_batch_index_++,
                      observe_states_);
    }

    const MarkovChain& chain() const { return chain_; }
    bool observes_states() const { return observe_states_; }
    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t batches_drawn() const { return next_batch_index_; }
    void reset() { next_batch_index_ = 0; }

    SeedLineage lineage() const {
        return {master_seed_, stream_id_, 0, next_batch_index_};
    }

  private:
    MarkovChain chain_;
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    bool observe_states_;
    std::uint64_t next_batch_index_ = 0;
};

// Empirical multinomial over length-l words for a pair of chains.  Only
// words observed in at least one chain are stored; totals keep the full
// sample sizes.
struct TraceCounts {
    long long length = 0;
    std::uint64_t total1 = 0;
    std::uint64_t total2 = 0;
    size_t alphabet_size = 0;
    std::map<Word, std::pair<std::uint64_t, std::uint64_t>> cells;
};

TraceCounts count_traces(const SampleBatch& batch1, const SampleBatch& batch2);

// Associative, commutative merge of counts of equal length.
TraceCounts merge_counts(const TraceCounts& a, const TraceCounts& b);
void merge_into(TraceCounts& into, const TraceCounts& from);

// Marginal counts of the length-i prefixes; totals are preserved.
TraceCounts prefix_counts(const TraceCounts& counts, long long i);

}  // namespace lmc
